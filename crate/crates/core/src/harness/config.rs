use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::Shape;
use crate::threebody::{ContactMethod, Parity};

/// A run description, read from TOML.
///
/// ```toml
/// [run]
/// name = "type2"
/// mode = "sweep"
///
/// [shape]
/// name = "mexican-hat"
///
/// [coupling]
/// start = 0.32
/// halvings = 4
/// ```
#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    #[serde(default)]
    pub shape: ShapeSection,
    #[serde(default)]
    pub coupling: CouplingSection,
    #[serde(default)]
    pub three_body: ThreeBodySection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub tolerance: ToleranceSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub proof: ProofSection,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    TwoBody,
    ThreeBody,
    Sweep,
    VerifyProof,
    Oracle,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub name: String,
    pub mode: Mode,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ShapeSection {
    pub name: String,
    pub width: Option<f64>,
    pub shift: Option<f64>,
    pub skew: Option<f64>,
}

impl Default for ShapeSection {
    fn default() -> Self {
        Self { name: "gaussian".into(), width: None, shift: None, skew: None }
    }
}

impl ShapeSection {
    pub fn build(&self) -> Result<Shape> {
        let mut o = BTreeMap::new();
        for (k, v) in [("width", self.width), ("shift", self.shift), ("skew", self.skew)] {
            if let Some(v) = v {
                o.insert(k.to_string(), v);
            }
        }
        Shape::by_name(&self.name, &o)
    }
}

/// Couplings as an explicit list or as `start` halved `halvings` times.
#[derive(Debug, Clone, Default, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingSection {
    pub v0: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub halvings: Option<usize>,
}

impl CouplingSection {
    /// Couplings ordered by decreasing `|v0|`.
    pub fn values(&self) -> Result<Vec<f64>> {
        let mut v = match (&self.v0, self.start) {
            (Some(list), None) => list.clone(),
            (None, Some(s)) => (0..=self.halvings.unwrap_or(0)).map(|k| s / 2f64.powi(k as i32)).collect(),
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either coupling.v0 or coupling.start, not both".into()))
            }
            (None, None) => return Err(Error::Config("no couplings: set coupling.v0 or coupling.start".into())),
        };
        if v.iter().any(|x| !x.is_finite() || *x == 0.0) {
            return Err(Error::Config("couplings must be finite and nonzero".into()));
        }
        v.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap().then(a.partial_cmp(b).unwrap()));
        Ok(v)
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ThreeBodySection {
    pub alpha: Vec<f64>,
    pub parity: Vec<String>,
    pub states: usize,
    pub contact_method: String,
}

impl Default for ThreeBodySection {
    fn default() -> Self {
        Self { alpha: vec![1.0], parity: vec!["even".into()], states: 1, contact_method: "reduced".into() }
    }
}

impl ThreeBodySection {
    pub fn parities(&self) -> Result<Vec<Parity>> {
        self.parity.iter().map(|p| Parity::parse(p)).collect()
    }

    pub fn method(&self) -> Result<ContactMethod> {
        match self.contact_method.as_str() {
            "reduced" => Ok(ContactMethod::Reduced),
            "tensor-dense" => Ok(ContactMethod::TensorDense),
            "tensor-matrix-free" => Ok(ContactMethod::TensorMatrixFree),
            other => Err(Error::Config(format!("unknown contact method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub np: usize,
    pub nk: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { np: 48, nk: 48 }
    }
}

/// Solver tolerances; unset entries keep each solver's own default.
#[derive(Debug, Clone, Default, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceSection {
    pub root: Option<f64>,
    pub eigen: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
    pub wavefunctions: bool,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    /// `two-body` or `three-body`.
    pub kind: String,
    /// Three-body box half-width (scaled units for contact).
    pub extent: Option<f64>,
    pub levels: Option<Vec<usize>>,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self { kind: "two-body".into(), extent: None, levels: None }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ProofSection {
    pub q0: Vec<f64>,
}

impl Default for ProofSection {
    fn default() -> Self {
        Self { q0: vec![0.2, 0.1, 0.05, 0.025, 0.0125] }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configs serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if self.run.name.is_empty() || self.run.name.contains(['/', '\\']) {
            return Err(Error::Config("run.name must be a non-empty file stem".into()));
        }
        if self.grid.np < 4 || self.grid.nk < 4 {
            return Err(Error::Config("grid sizes must be at least 4".into()));
        }
        if self.three_body.states == 0 {
            return Err(Error::Config("three_body.states must be at least 1".into()));
        }
        if self.three_body.alpha.is_empty() || self.three_body.alpha.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::Config("three_body.alpha must list positive mass ratios".into()));
        }
        for t in [self.tolerance.root, self.tolerance.eigen].into_iter().flatten() {
            if !(t > 0.0) {
                return Err(Error::Config("tolerances must be positive".into()));
            }
        }
        self.shape.build()?;
        if matches!(self.run.mode, Mode::TwoBody | Mode::Sweep)
            || (self.run.mode == Mode::ThreeBody && self.shape.name != "contact")
        {
            self.coupling.values()?;
        }
        if self.run.mode == Mode::VerifyProof && (self.proof.q0.is_empty() || self.proof.q0.iter().any(|q| !(*q > 0.0)))
        {
            return Err(Error::Config("proof.q0 must list positive binding momenta".into()));
        }
        self.three_body.parities()?;
        self.three_body.method()?;
        if !matches!(self.oracle.kind.as_str(), "two-body" | "three-body") {
            return Err(Error::Config(format!(
                "oracle.kind must be `two-body` or `three-body`, got `{}`",
                self.oracle.kind
            )));
        }
        Ok(())
    }
}
