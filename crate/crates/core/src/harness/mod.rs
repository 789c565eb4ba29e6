//! Experiment orchestration: a TOML config in, CSV tables, a JSON summary and a
//! gnuplot stub out. Every acceptance rule checked by a run becomes a named flag.
//!
//! Points are solved on the rayon pool and collected in input order, and all
//! numbers are printed with fixed formatting, so identical configs give
//! byte-identical files for any thread count.

mod config;
mod fit;
mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

pub use config::{
    CouplingSection, GridSection, Mode, OracleSection, OutputSection, ProofSection, RunConfig, RunSection,
    ShapeSection, ThreeBodySection, ToleranceSection,
};
pub use fit::{fit_power_law, PowerLaw};
pub use output::{fmt_f64, gnuplot_stub, tensor_table, two_body_table, Table, ENERGY_UNITS};

use crate::error::{Error, Result};
use crate::oracle::{three_body_coordinate, two_body_coordinate, SpatialGrid};
use crate::potential::{Shape, ShapeKind};
use crate::threebody::{
    iteration_diagnostics, solve_contact_spectrum_with, solve_finite_range_spectrum_with, universal_prediction,
    ContactOptions, FiniteRangeOptions, Parity, Prediction, ThreeBodySpectrum,
};
use crate::twobody::{iterated_kernel_residual, solve_bound_state_with, TwoBodyOptions, TwoBodyResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Box half-width and grid levels of the contact three-body oracle at mass ratio `alpha`.
///
/// Heavier spectators bind more tightly, so the box shrinks with `alpha`. The
/// levels are spacing ratios 2:3:4 and stay under 600 points per axis.
pub fn default_oracle_box(alpha: f64) -> (f64, Vec<usize>) {
    let extent = if alpha <= 2.0 {
        10.0
    } else if alpha <= 10.0 {
        8.0
    } else {
        6.0
    };
    (extent, vec![297, 445, 593])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flag {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Flag {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoBodyRecord {
    pub shape: String,
    pub v0: f64,
    pub q0: f64,
    pub e0: f64,
    pub q0_asymptotic: f64,
    pub overlap: f64,
    pub symmetric_fraction: f64,
    pub norm_residual: f64,
    pub equation_residual: f64,
    pub grid_points: usize,
    pub error: Option<String>,
}

impl TwoBodyRecord {
    fn from_result(shape: &Shape, v0: f64, r: &Result<TwoBodyResult>) -> Self {
        match r {
            Ok(r) => Self {
                shape: shape.name.clone(),
                v0,
                q0: r.q0,
                e0: r.e0,
                q0_asymptotic: r.q0_asymptotic,
                overlap: r.overlap,
                symmetric_fraction: r.symmetric_fraction,
                norm_residual: r.norm_residual,
                equation_residual: r.equation_residual,
                grid_points: r.grid.len(),
                error: None,
            },
            Err(e) => Self {
                shape: shape.name.clone(),
                v0,
                q0: f64::NAN,
                e0: f64::NAN,
                q0_asymptotic: f64::NAN,
                overlap: f64::NAN,
                symmetric_fraction: f64::NAN,
                norm_residual: f64::NAN,
                equation_residual: f64::NAN,
                grid_points: 0,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreeBodyRecord {
    pub alpha: f64,
    pub parity: Parity,
    pub n: usize,
    pub epsilon: f64,
    pub residual: f64,
    pub discretization: f64,
    pub method: String,
    pub grid_np: usize,
    pub grid_nk: usize,
    pub v0: Option<f64>,
    pub q0: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub v0: f64,
    pub q0: f64,
    pub q0_asymptotic: f64,
    pub overlap: f64,
    pub n: usize,
    pub epsilon_n: f64,
    pub epsilon_star_n: f64,
    /// `ε_n - ε_n*`
    pub gap: f64,
    pub grid_np: usize,
    pub grid_nk: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionRecord {
    pub v0: f64,
    #[serde(flatten)]
    pub prediction: Prediction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofRecord {
    pub q0: f64,
    pub kernel_residual: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    pub a_pm_max: f64,
    pub a_pm_origin: f64,
    pub residual_to_contact: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRecord {
    pub kind: String,
    pub alpha: Option<f64>,
    pub parity: Option<Parity>,
    pub v0: Option<f64>,
    pub momentum: f64,
    pub momentum_error: f64,
    pub oracle: f64,
    pub oracle_error: f64,
    pub order: f64,
    pub difference: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub error: Option<String>,
}

/// Everything a run produced; serialized as the JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub name: String,
    pub mode: Mode,
    pub shape: String,
    pub shape_kind: ShapeKind,
    pub config: RunConfig,
    pub two_body: Vec<TwoBodyRecord>,
    pub three_body: Vec<ThreeBodyRecord>,
    pub sweep: Vec<SweepRecord>,
    pub predictions: Vec<PredictionRecord>,
    pub proof: Vec<ProofRecord>,
    pub oracle: Vec<OracleRecord>,
    pub fits: BTreeMap<String, PowerLaw>,
    pub flags: Vec<Flag>,
    pub all_passed: bool,
    pub notes: Vec<String>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: SweepReport,
    /// Data files; the summary is rendered separately by [`RunOutput::summary_json`].
    pub files: Vec<OutputFile>,
}

impl RunOutput {
    pub fn summary_name(&self) -> String {
        format!("{}_summary.json", self.report.name)
    }

    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
        s.push('\n');
        s
    }

    /// Writes all files into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for f in &self.files {
            let p = dir.join(&f.name);
            std::fs::write(&p, &f.contents)?;
            paths.push(p);
        }
        let p = dir.join(self.summary_name());
        std::fs::write(&p, self.summary_json())?;
        paths.push(p);
        Ok(paths)
    }

    pub fn all_passed(&self) -> bool {
        self.report.all_passed
    }
}

/// Runs `config` on a dedicated pool of `threads` workers (`None`: rayon's default).
pub fn run_with_threads(config: &RunConfig, threads: Option<usize>) -> Result<RunOutput> {
    match threads {
        None => run(config),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| run(config))
        }
    }
}

/// Executes the solves requested by `config`.
///
/// Invalid configs are errors; solver failures are recorded on their points and
/// fail the corresponding flags.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let shape = config.shape.build()?;
    let mut echo = config.clone();
    echo.output.dir = None;
    let mut b = Builder {
        cfg: config,
        shape: &shape,
        report: SweepReport {
            schema_version: SCHEMA_VERSION,
            name: config.run.name.clone(),
            mode: config.run.mode,
            shape: shape.name.clone(),
            shape_kind: shape.kind,
            config: echo,
            two_body: vec![],
            three_body: vec![],
            sweep: vec![],
            predictions: vec![],
            proof: vec![],
            oracle: vec![],
            fits: BTreeMap::new(),
            flags: vec![],
            all_passed: false,
            notes: vec![],
            files: vec![],
        },
        files: vec![],
    };
    match config.run.mode {
        Mode::TwoBody => b.two_body()?,
        Mode::ThreeBody => b.three_body()?,
        Mode::Sweep => b.sweep()?,
        Mode::VerifyProof => b.verify_proof()?,
        Mode::Oracle => b.oracle()?,
    }
    let Builder { mut report, files, .. } = b;
    if report.flags.is_empty() {
        report.flags.push(Flag::new("run.nonempty", false, "the run produced no checks"));
    }
    report.all_passed = report.flags.iter().all(|f| f.passed);
    report.files = files.iter().map(|f| f.name.clone()).collect();
    report.files.push(format!("{}_summary.json", report.name));
    Ok(RunOutput { report, files })
}

struct Builder<'a> {
    cfg: &'a RunConfig,
    shape: &'a Shape,
    report: SweepReport,
    files: Vec<OutputFile>,
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[1] < w[0])
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[1] > w[0])
}

/// `k of n points solved`, followed by the failures.
fn solved_detail(n: usize, failed: &[String]) -> String {
    let mut s = format!("{} of {n} points solved", n - failed.len());
    if !failed.is_empty() {
        s.push_str(": ");
        s.push_str(&failed.join("; "));
    }
    s
}

/// Maximum that propagates NaN.
fn max_nan(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |a: f64, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>().join(" ")
}

impl Builder<'_> {
    fn stem(&self) -> &str {
        &self.cfg.run.name
    }

    fn add_file(&mut self, suffix: &str, contents: String) {
        let name = format!("{}{suffix}", self.stem());
        self.files.push(OutputFile { name, contents });
    }

    fn flag(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.report.flags.push(Flag::new(name, passed, detail));
    }

    fn two_body_options(&self) -> TwoBodyOptions {
        let mut o = TwoBodyOptions::default();
        if let Some(t) = self.cfg.tolerance.root {
            o.root_tol = t;
        }
        o
    }

    fn contact_options(&self) -> Result<ContactOptions> {
        let mut o = ContactOptions {
            method: self.cfg.three_body.method()?,
            np: self.cfg.grid.np,
            nk: self.cfg.grid.nk,
            export: self.cfg.output.wavefunctions,
            ..ContactOptions::default()
        };
        if let Some(t) = self.cfg.tolerance.root {
            o.root_tol = t;
        }
        if let Some(t) = self.cfg.tolerance.eigen {
            o.eigen_tol = t;
        }
        Ok(o)
    }

    fn finite_options(&self) -> FiniteRangeOptions {
        let mut o = FiniteRangeOptions {
            np: self.cfg.grid.np,
            nk: self.cfg.grid.nk,
            export: self.cfg.output.wavefunctions,
            ..FiniteRangeOptions::default()
        };
        if let Some(t) = self.cfg.tolerance.root {
            o.root_tol = t;
        }
        if let Some(t) = self.cfg.tolerance.eigen {
            o.eigen_tol = t;
        }
        o
    }

    fn solve_two_body(&self, couplings: &[f64]) -> Vec<Result<TwoBodyResult>> {
        let opts = self.two_body_options();
        couplings.par_iter().map(|&v0| solve_bound_state_with(self.shape, v0, &opts)).collect()
    }

    fn push_two_body(&mut self, couplings: &[f64], results: &[Result<TwoBodyResult>]) {
        for (v0, r) in couplings.iter().zip(results) {
            self.report.two_body.push(TwoBodyRecord::from_result(self.shape, *v0, r));
        }
        let mut t = Table::new(
            format!("{ENERGY_UNITS}; q0 = sqrt(-2 E0)"),
            &["shape", "v0", "q0", "E0", "q0_asymptotic", "overlap", "symmetric_fraction", "norm_residual", "status"],
        );
        for r in &self.report.two_body {
            t.push(vec![
                r.shape.clone(),
                fmt_f64(r.v0),
                fmt_f64(r.q0),
                fmt_f64(r.e0),
                fmt_f64(r.q0_asymptotic),
                fmt_f64(r.overlap),
                fmt_f64(r.symmetric_fraction),
                fmt_f64(r.norm_residual),
                r.error.clone().unwrap_or_else(|| "ok".into()),
            ]);
        }
        self.add_file("_two_body.csv", t.render());
        if self.cfg.output.wavefunctions {
            for (i, r) in results.iter().enumerate() {
                if let Ok(r) = r {
                    self.add_file(&format!("_wf2_v{i}.csv"), two_body_table(&r.grid, &r.wavefunction));
                }
            }
        }
    }

    fn two_body(&mut self) -> Result<()> {
        let vs = self.cfg.coupling.values()?;
        let results = self.solve_two_body(&vs);
        self.push_two_body(&vs, &results);
        let failed: Vec<String> = self.report.two_body.iter().filter_map(|r| r.error.clone()).collect();
        self.flag("two_body.solved", failed.is_empty(), solved_detail(self.report.two_body.len(), &failed));
        if self.shape.kind == ShapeKind::Contact {
            let dev = self.report.two_body.iter().filter(|r| r.error.is_none()).map(|r| (r.q0 / -r.v0 - 1.0).abs());
            let dev = max_nan(dev);
            self.flag(
                "two_body.contact_exact",
                failed.is_empty() && dev <= 1e-7,
                format!("max |q0/(-v0) - 1| = {dev:.3e}"),
            );
        } else {
            self.two_body_laws();
        }
        self.two_body_plot();
        Ok(())
    }

    /// Weak-coupling flags for each sign of `v0` with at least three points.
    fn two_body_laws(&mut self) {
        let (target, band) = match self.shape.kind {
            ShapeKind::TypeI => (1.0, 0.05),
            _ => (2.0, 0.1),
        };
        for (label, sign) in [("negative", -1.0), ("positive", 1.0)] {
            let recs: Vec<TwoBodyRecord> =
                self.report.two_body.iter().filter(|r| r.v0.signum() == sign && r.error.is_none()).cloned().collect();
            let total = self.report.two_body.iter().filter(|r| r.v0.signum() == sign).count();
            if total < 3 {
                continue;
            }
            let x: Vec<f64> = recs.iter().map(|r| r.v0.abs()).collect();
            let q: Vec<f64> = recs.iter().map(|r| r.q0).collect();
            match fit_power_law(&x, &q) {
                Ok(f) if recs.len() == total => {
                    self.report.fits.insert(format!("q0_vs_abs_v0.{label}"), f);
                    let ok = (f.exponent - target).abs() <= band;
                    self.flag(
                        format!("two_body.exponent.{label}"),
                        ok,
                        format!("exponent {:.4} (target {target} +- {band})", f.exponent),
                    );
                }
                _ => self.flag(format!("two_body.exponent.{label}"), false, "points failed to solve"),
            }
            let dev: Vec<f64> = recs.iter().map(|r| (r.q0 / r.q0_asymptotic - 1.0).abs()).collect();
            let mut ok = recs.len() == total && strictly_decreasing(&dev);
            let mut detail = format!("|q0/q0_asymptotic - 1| = {}", list(&dev));
            if self.shape.kind == ShapeKind::TypeI {
                // the correction to the linear law is first order in |v0|
                match fit_power_law(&x, &dev) {
                    Ok(f) => {
                        self.report.fits.insert(format!("asymptotic_deviation_vs_abs_v0.{label}"), f);
                        ok &= (f.exponent - 1.0).abs() <= 0.2;
                        detail.push_str(&format!("; exponent {:.4} (target 1 +- 0.2)", f.exponent));
                    }
                    Err(_) => ok = false,
                }
            }
            self.flag(format!("two_body.asymptotic_ratio.{label}"), ok, detail);
            let ov: Vec<f64> = recs.iter().map(|r| r.overlap).collect();
            self.flag(
                format!("two_body.overlap_monotone.{label}"),
                recs.len() == total && strictly_increasing(&ov),
                format!("overlap = {}", list(&ov)),
            );
            let last = ov.last().copied().unwrap_or(f64::NAN);
            self.flag(
                format!("two_body.overlap_final.{label}"),
                recs.len() == total && last >= 0.999,
                format!("overlap at smallest |v0| = {last:.6} (>= 0.999)"),
            );
        }
    }

    fn two_body_plot(&mut self) {
        let csv = format!("{}_two_body.csv", self.stem());
        let gp = gnuplot_stub("q0 versus |v0|", &csv, 2, &[(3, "q0"), (5, "q0_asymptotic")], "|v0|", "q0", true);
        self.add_file(".gp", gp);
    }

    fn three_body_rows(
        &self,
        spec: &Result<ThreeBodySpectrum>,
        alpha: f64,
        parity: Parity,
        v0: Option<f64>,
    ) -> Vec<ThreeBodyRecord> {
        let (np, nk) = (self.cfg.grid.np, self.cfg.grid.nk);
        match spec {
            Ok(s) => {
                let q0 = match &s.interaction {
                    crate::threebody::Interaction::FiniteRange { q0, .. } => Some(*q0),
                    crate::threebody::Interaction::Contact => None,
                };
                (0..s.epsilons.len())
                    .map(|n| ThreeBodyRecord {
                        alpha,
                        parity,
                        n,
                        epsilon: s.epsilons[n],
                        residual: s.residuals[n],
                        discretization: s.discretization[n],
                        method: s.method.clone(),
                        grid_np: s.grid_np,
                        grid_nk: s.grid_nk,
                        v0,
                        q0,
                        error: None,
                    })
                    .collect()
            }
            Err(e) => vec![ThreeBodyRecord {
                alpha,
                parity,
                n: 0,
                epsilon: f64::NAN,
                residual: f64::NAN,
                discretization: f64::NAN,
                method: String::new(),
                grid_np: np,
                grid_nk: nk,
                v0,
                q0: None,
                error: Some(e.to_string()),
            }],
        }
    }

    fn export_wavefunctions(&mut self, spec: &Result<ThreeBodySpectrum>, tag: &str) {
        if !self.cfg.output.wavefunctions {
            return;
        }
        if let Ok(s) = spec {
            for (n, wf) in s.wavefunctions.iter().enumerate() {
                self.add_file(&format!("_wf_{tag}_n{n}.csv"), tensor_table(wf));
            }
        }
    }

    fn three_body(&mut self) -> Result<()> {
        let tb = &self.cfg.three_body;
        let parities = tb.parities()?;
        let contact = self.shape.kind == ShapeKind::Contact;
        let couplings = if contact { vec![f64::NAN] } else { self.cfg.coupling.values()? };
        let mut jobs = Vec::new();
        for (iv, &v0) in couplings.iter().enumerate() {
            for (ia, &alpha) in tb.alpha.iter().enumerate() {
                for &parity in &parities {
                    let tag = if contact { format!("a{ia}_{parity}") } else { format!("v{iv}_a{ia}_{parity}") };
                    jobs.push((v0, alpha, parity, tag));
                }
            }
        }
        let copts = self.contact_options()?;
        let fopts = self.finite_options();
        let states = tb.states;
        let shape = self.shape;
        let specs: Vec<Result<ThreeBodySpectrum>> = jobs
            .par_iter()
            .map(|(v0, alpha, parity, _)| {
                if contact {
                    solve_contact_spectrum_with(*alpha, *parity, states, &copts)
                } else {
                    solve_finite_range_spectrum_with(shape, *v0, *alpha, *parity, states, &fopts)
                }
            })
            .collect();
        for ((v0, alpha, parity, tag), spec) in jobs.iter().zip(&specs) {
            let v = if contact { None } else { Some(*v0) };
            let rows = self.three_body_rows(spec, *alpha, *parity, v);
            self.report.three_body.extend(rows);
            if let Ok(s) = spec {
                self.report.notes.extend(s.notes.iter().cloned());
            }
            self.export_wavefunctions(spec, tag);
        }
        let mut header = vec!["alpha", "parity", "n", "epsilon", "residual", "grid_NP", "grid_NK"];
        if !contact {
            header.extend(["v0", "q0"]);
        }
        header.push("status");
        let mut t = Table::new(format!("{ENERGY_UNITS}; grid_NP x grid_NK is the wave-function grid"), &header);
        for r in &self.report.three_body {
            let mut row = vec![
                fmt_f64(r.alpha),
                r.parity.to_string(),
                r.n.to_string(),
                fmt_f64(r.epsilon),
                fmt_f64(r.residual),
                r.grid_np.to_string(),
                r.grid_nk.to_string(),
            ];
            if !contact {
                row.push(output::fmt_opt(r.v0));
                row.push(output::fmt_opt(r.q0));
            }
            row.push(r.error.clone().unwrap_or_else(|| "ok".into()));
            t.push(row);
        }
        self.add_file("_three_body.csv", t.render());
        let failed: Vec<String> = self.report.three_body.iter().filter_map(|r| r.error.clone()).collect();
        self.flag("three_body.solved", failed.is_empty(), solved_detail(self.report.three_body.len(), &failed));
        let worst = max_nan(self.report.three_body.iter().filter(|r| r.error.is_none()).map(|r| r.residual));
        self.flag(
            "three_body.residual",
            failed.is_empty() && worst <= 1e-6,
            format!("largest eigen-equation residual {worst:.3e} (<= 1e-6)"),
        );
        let csv = format!("{}_three_body.csv", self.stem());
        self.add_file(
            ".gp",
            gnuplot_stub("three-body energies", &csv, 1, &[(4, "epsilon")], "alpha", "epsilon", false),
        );
        Ok(())
    }

    fn sweep(&mut self) -> Result<()> {
        let vs = self.cfg.coupling.values()?;
        let alpha = self.cfg.three_body.alpha[0];
        let parity = self.cfg.three_body.parities()?[0];
        let states = self.cfg.three_body.states;
        if self.cfg.three_body.alpha.len() > 1 || self.cfg.three_body.parity.len() > 1 {
            self.report
                .notes
                .push(format!("sweep uses the first mass ratio and parity only (alpha = {alpha}, {parity})"));
        }
        let two = self.solve_two_body(&vs);
        self.push_two_body(&vs, &two);
        let copts = ContactOptions { export: false, discretization_estimate: false, ..self.contact_options()? };
        let star = solve_contact_spectrum_with(alpha, parity, states, &copts)?;
        let fopts = self.finite_options();
        let shape = self.shape;
        let specs: Vec<Result<ThreeBodySpectrum>> = vs
            .par_iter()
            .zip(&two)
            .map(|(&v0, t)| match t {
                Ok(_) => solve_finite_range_spectrum_with(shape, v0, alpha, parity, states, &fopts),
                Err(e) => Err(Error::NoBoundState(format!("two-body solve failed: {e}"))),
            })
            .collect();
        let preds: Vec<Result<Vec<Prediction>>> =
            vs.par_iter().map(|&v0| universal_prediction(shape, v0, alpha, parity, states)).collect();
        for (iv, ((&v0, t), spec)) in vs.iter().zip(&two).zip(&specs).enumerate() {
            let (q0, qa, ov) =
                t.as_ref().map_or((f64::NAN, f64::NAN, f64::NAN), |t| (t.q0, t.q0_asymptotic, t.overlap));
            let rows = self.three_body_rows(spec, alpha, parity, Some(v0));
            self.report.three_body.extend(rows);
            for n in 0..states {
                let es = star.epsilons.get(n).copied().unwrap_or(f64::NAN);
                let (e, err) = match spec {
                    Ok(s) => match s.epsilons.get(n) {
                        Some(&e) => (e, None),
                        None => (f64::NAN, Some(format!("state {n} not found below threshold"))),
                    },
                    Err(e) => (f64::NAN, Some(e.to_string())),
                };
                self.report.sweep.push(SweepRecord {
                    v0,
                    q0,
                    q0_asymptotic: qa,
                    overlap: ov,
                    n,
                    epsilon_n: e,
                    epsilon_star_n: es,
                    gap: e - es,
                    grid_np: self.cfg.grid.np,
                    grid_nk: self.cfg.grid.nk,
                    error: err,
                });
            }
            self.export_wavefunctions(spec, &format!("v{iv}"));
        }
        for (&v0, p) in vs.iter().zip(&preds) {
            match p {
                Ok(p) => {
                    self.report.predictions.extend(p.iter().map(|x| PredictionRecord { v0, prediction: x.clone() }))
                }
                Err(e) => self.report.notes.push(format!("prediction at v0 = {v0}: {e}")),
            }
        }
        let mut t = Table::new(
            format!("{ENERGY_UNITS}; gap = epsilon_n - epsilon_star_n"),
            &["v0", "q0", "epsilon_n", "epsilon_star_n", "gap", "n", "status"],
        );
        for r in &self.report.sweep {
            t.push(vec![
                fmt_f64(r.v0),
                fmt_f64(r.q0),
                fmt_f64(r.epsilon_n),
                fmt_f64(r.epsilon_star_n),
                fmt_f64(r.gap),
                r.n.to_string(),
                r.error.clone().unwrap_or_else(|| "ok".into()),
            ]);
        }
        self.add_file("_sweep.csv", t.render());

        let failed: Vec<String> = self.report.sweep.iter().filter_map(|r| r.error.clone()).collect();
        self.flag("sweep.solved", failed.is_empty(), solved_detail(self.report.sweep.len(), &failed));
        let ground: Vec<SweepRecord> = self.report.sweep.iter().filter(|r| r.n == 0).cloned().collect();
        let gaps: Vec<f64> = ground.iter().map(|r| r.gap.abs()).collect();
        let halvings = ground.len().saturating_sub(1);
        self.flag(
            "sweep.gap_monotone",
            halvings >= 4 && strictly_decreasing(&gaps),
            format!("|eps_0 - eps_0*| = {} over {halvings} halvings (>= 4)", list(&gaps)),
        );
        let last = ground.last();
        let rel = last.map_or(f64::NAN, |r| (r.gap / r.epsilon_star_n).abs());
        self.flag("sweep.final_gap", rel < 0.05, format!("final |gap|/|eps_0*| = {rel:.4e} (< 0.05)"));
        let smallest = vs.last().copied().unwrap_or(f64::NAN);
        let pr: Vec<f64> = self
            .report
            .predictions
            .iter()
            .filter(|p| p.v0 == smallest)
            .map(|p| p.prediction.relative_difference)
            .collect();
        let worst = pr.iter().cloned().fold(f64::NAN, f64::max);
        self.flag(
            "sweep.prediction",
            !pr.is_empty() && pr.iter().all(|d| *d < 0.10),
            format!("route difference at v0 = {smallest}: {worst:.4e} (< 0.1)"),
        );
        let x: Vec<f64> = ground.iter().map(|r| r.v0.abs()).collect();
        if let Ok(f) = fit_power_law(&x, &gaps) {
            self.report.fits.insert("gap_vs_abs_v0".into(), f);
        }
        let q: Vec<f64> = ground.iter().map(|r| r.q0).collect();
        if let Ok(f) = fit_power_law(&x, &q) {
            self.report.fits.insert("q0_vs_abs_v0".into(), f);
        }
        let csv = format!("{}_sweep.csv", self.stem());
        let gp = gnuplot_stub(
            "three-body gap versus |v0|",
            &csv,
            1,
            &[(5, "gap")],
            "|v0|",
            "|epsilon_0 - epsilon_0*|",
            true,
        );
        // the two-body stub is superseded by the sweep plot
        self.files.retain(|f| !f.name.ends_with(".gp"));
        self.add_file(".gp", gp);
        Ok(())
    }

    fn verify_proof(&mut self) -> Result<()> {
        let alpha = self.cfg.three_body.alpha[0];
        let parity = self.cfg.three_body.parities()?[0];
        let shape = self.shape;
        let rows: Vec<ProofRecord> = self
            .cfg
            .proof
            .q0
            .par_iter()
            .map(|&q0| {
                let d = iterated_kernel_residual(shape, q0)
                    .and_then(|r| Ok((r, iteration_diagnostics(shape, q0, alpha, parity)?)));
                match d {
                    Ok((r, d)) => ProofRecord {
                        q0,
                        kernel_residual: r,
                        i1: d.i_norms[0],
                        i2: d.i_norms[1],
                        i3: d.i_norms[2],
                        i4: d.i_norms[3],
                        a_pm_max: d.a_pm_max,
                        a_pm_origin: d.a_pm_origin,
                        residual_to_contact: d.residual_to_contact,
                        error: None,
                    },
                    Err(e) => ProofRecord {
                        q0,
                        kernel_residual: f64::NAN,
                        i1: f64::NAN,
                        i2: f64::NAN,
                        i3: f64::NAN,
                        i4: f64::NAN,
                        a_pm_max: f64::NAN,
                        a_pm_origin: f64::NAN,
                        residual_to_contact: f64::NAN,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect();
        let mut rows = rows;
        rows.sort_by(|a, b| b.q0.partial_cmp(&a.q0).unwrap());
        self.report.proof = rows;
        let mut t = Table::new(
            "q0 in 1/xi0; norms dimensionless (RMS over the lattice P, K, P'' in {-2..2}); a_pm_* are |A|/q0",
            &[
                "q0",
                "kernel_residual",
                "I1",
                "I2",
                "I3",
                "I4",
                "a_pm_max",
                "a_pm_origin",
                "residual_to_contact",
                "status",
            ],
        );
        for r in &self.report.proof {
            t.push(vec![
                fmt_f64(r.q0),
                fmt_f64(r.kernel_residual),
                fmt_f64(r.i1),
                fmt_f64(r.i2),
                fmt_f64(r.i3),
                fmt_f64(r.i4),
                fmt_f64(r.a_pm_max),
                fmt_f64(r.a_pm_origin),
                fmt_f64(r.residual_to_contact),
                r.error.clone().unwrap_or_else(|| "ok".into()),
            ]);
        }
        self.add_file("_proof.csv", t.render());
        let p = self.report.proof.clone();
        let failed: Vec<String> = p.iter().filter_map(|r| r.error.clone()).collect();
        self.flag("proof.solved", failed.is_empty(), solved_detail(p.len(), &failed));
        let enough = p.len() >= 2;
        for (name, col) in [
            ("proof.kernel_residual_decreasing", p.iter().map(|r| r.kernel_residual).collect::<Vec<_>>()),
            ("proof.i2_decreasing", p.iter().map(|r| r.i2).collect()),
            ("proof.i3_decreasing", p.iter().map(|r| r.i3).collect()),
            ("proof.residual_to_contact_decreasing", p.iter().map(|r| r.residual_to_contact).collect()),
        ] {
            self.flag(name, enough && strictly_decreasing(&col), list(&col));
        }
        let a: Vec<f64> = p.iter().map(|r| r.a_pm_origin).collect();
        let first = a.first().copied().unwrap_or(f64::NAN);
        let sup = a.iter().cloned().fold(f64::NAN, f64::max);
        self.flag(
            "proof.a_pm_bounded",
            enough && a.iter().all(|x| x.is_finite()) && sup <= 2.0 * first,
            format!("|A|/q0 at P' = 0: {} (sup <= 2 x first)", list(&a)),
        );
        let csv = format!("{}_proof.csv", self.stem());
        let gp = gnuplot_stub(
            "iteration diagnostics versus q0",
            &csv,
            1,
            &[(2, "kernel_residual"), (4, "I2"), (5, "I3"), (9, "residual_to_contact"), (8, "a_pm_origin")],
            "q0",
            "norm",
            true,
        );
        self.add_file(".gp", gp);
        Ok(())
    }

    fn oracle(&mut self) -> Result<()> {
        let shape = self.shape;
        let header = [
            "kind",
            "alpha",
            "parity",
            "v0",
            "momentum",
            "momentum_error",
            "oracle",
            "oracle_error",
            "order",
            "difference",
            "status",
        ];
        let rows: Vec<OracleRecord> = if self.cfg.oracle.kind == "two-body" {
            let vs = self.cfg.coupling.values()?;
            let opts = self.two_body_options();
            vs.par_iter()
                .map(|&v0| {
                    let r = solve_bound_state_with(shape, v0, &opts).and_then(|m| {
                        let g = SpatialGrid::auto_two_body(shape, v0)?;
                        Ok((m, two_body_coordinate(shape, v0, &g)?))
                    });
                    match r {
                        Ok((m, o)) => {
                            let diff = m.e0 - o.value;
                            let tol = 1e-7 * m.e0.abs();
                            OracleRecord {
                                kind: "two-body".into(),
                                alpha: None,
                                parity: None,
                                v0: Some(v0),
                                momentum: m.e0,
                                momentum_error: f64::NAN,
                                oracle: o.value,
                                oracle_error: o.error,
                                order: o.order,
                                difference: diff,
                                tolerance: tol,
                                passed: diff.abs() <= tol,
                                error: None,
                            }
                        }
                        Err(e) => failed_oracle("two-body", None, None, Some(v0), e),
                    }
                })
                .collect()
        } else {
            let parities = self.cfg.three_body.parities()?;
            let contact = shape.kind == ShapeKind::Contact;
            let v0 = if contact { None } else { Some(self.cfg.coupling.values()?[0]) };
            let mut jobs = Vec::new();
            for &a in &self.cfg.three_body.alpha {
                for &p in &parities {
                    jobs.push((a, p));
                }
            }
            let copts = ContactOptions { export: false, ..self.contact_options()? };
            let fopts = FiniteRangeOptions { export: false, discretization_estimate: true, ..self.finite_options() };
            let ocfg = self.cfg.oracle.clone();
            jobs.par_iter()
                .map(|&(alpha, parity)| {
                    let r = (|| -> Result<OracleRecord> {
                        let spec = match v0 {
                            None => solve_contact_spectrum_with(alpha, parity, 1, &copts)?,
                            Some(v) => solve_finite_range_spectrum_with(shape, v, alpha, parity, 1, &fopts)?,
                        };
                        let m = *spec
                            .epsilons
                            .first()
                            .ok_or_else(|| Error::NoBoundState(format!("no {parity} state at alpha = {alpha}")))?;
                        let me = spec.discretization.first().copied().filter(|x| x.is_finite()).unwrap_or(0.0);
                        let (ext, lv) = default_oracle_box(alpha);
                        let extent = match (ocfg.extent, v0) {
                            (Some(e), _) => e,
                            (None, None) => ext,
                            (None, Some(v)) => {
                                let q0 = solve_bound_state_with(shape, v, &TwoBodyOptions::default())?.q0;
                                ext / q0
                            }
                        };
                        let levels = ocfg.levels.clone().unwrap_or(lv);
                        let o = three_body_coordinate(shape, v0.unwrap_or(-1.0), alpha, parity, extent, &levels)?;
                        let diff = m - o.value;
                        let tol = o.error + me;
                        Ok(OracleRecord {
                            kind: "three-body".into(),
                            alpha: Some(alpha),
                            parity: Some(parity),
                            v0,
                            momentum: m,
                            momentum_error: me,
                            oracle: o.value,
                            oracle_error: o.error,
                            order: o.order,
                            difference: diff,
                            tolerance: tol,
                            passed: diff.abs() <= tol,
                            error: None,
                        })
                    })();
                    r.unwrap_or_else(|e| failed_oracle("three-body", Some(alpha), Some(parity), v0, e))
                })
                .collect()
        };
        self.report.oracle = rows;
        let units = if self.cfg.oracle.kind == "two-body" {
            format!("{ENERGY_UNITS}; two-body rows compare E0")
        } else {
            format!("{ENERGY_UNITS}; three-body rows compare eps_0")
        };
        let mut t = Table::new(units, &header);
        for r in &self.report.oracle {
            t.push(vec![
                r.kind.clone(),
                output::fmt_opt(r.alpha),
                r.parity.map_or_else(String::new, |p| p.to_string()),
                output::fmt_opt(r.v0),
                fmt_f64(r.momentum),
                fmt_f64(r.momentum_error),
                fmt_f64(r.oracle),
                fmt_f64(r.oracle_error),
                fmt_f64(r.order),
                fmt_f64(r.difference),
                r.error.clone().unwrap_or_else(|| "ok".into()),
            ]);
        }
        self.add_file("_oracle.csv", t.render());
        let o = self.report.oracle.clone();
        let detail: Vec<String> = o
            .iter()
            .map(|r| match &r.error {
                Some(e) => e.clone(),
                None => format!("|diff| {:.3e} vs {:.3e}", r.difference.abs(), r.tolerance),
            })
            .collect();
        let name = if self.cfg.oracle.kind == "two-body" {
            "oracle.two_body_agreement"
        } else {
            "oracle.three_body_agreement"
        };
        self.flag(name, !o.is_empty() && o.iter().all(|r| r.passed), detail.join("; "));
        Ok(())
    }
}

fn failed_oracle(kind: &str, alpha: Option<f64>, parity: Option<Parity>, v0: Option<f64>, e: Error) -> OracleRecord {
    OracleRecord {
        kind: kind.into(),
        alpha,
        parity,
        v0,
        momentum: f64::NAN,
        momentum_error: f64::NAN,
        oracle: f64::NAN,
        oracle_error: f64::NAN,
        order: f64::NAN,
        difference: f64::NAN,
        tolerance: f64::NAN,
        passed: false,
        error: Some(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::from_toml(text).unwrap()
    }

    #[test]
    fn contact_two_body_single_row() {
        let out = run(&cfg(
            "[run]\nname = \"c\"\nmode = \"two-body\"\n[shape]\nname = \"contact\"\n[coupling]\nv0 = [-0.3]\n",
        ))
        .unwrap();
        assert_eq!(out.report.two_body.len(), 1);
        assert!((out.report.two_body[0].q0 - 0.3).abs() < 1e-12);
        assert!(out.all_passed(), "{:?}", out.report.flags);
        let csv = &out.files.iter().find(|f| f.name == "c_two_body.csv").unwrap().contents;
        assert!(csv.starts_with("# units:"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn failed_points_are_recorded() {
        let out = run(&cfg(
            "[run]\nname = \"r\"\nmode = \"two-body\"\n[shape]\nname = \"contact\"\n[coupling]\nv0 = [-0.3, 0.2]\n",
        ))
        .unwrap();
        assert_eq!(out.report.two_body.len(), 2);
        assert!(out.report.two_body.iter().any(|r| r.error.is_some()));
        assert!(!out.all_passed());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for bad in [
            "[run]\nname = \"x\"\nmode = \"two-body\"\n",
            "[run]\nname = \"x\"\nmode = \"two-body\"\n[shape]\nname = \"nope\"\n[coupling]\nv0 = [-1.0]\n",
            "[run]\nname = \"x\"\nmode = \"two-body\"\n[coupling]\nv0 = [-1.0]\n[tolerance]\nroot = -1.0\n",
            "[run]\nname = \"x\"\nmode = \"fly\"\n",
            "[run]\nname = \"x\"\nmode = \"two-body\"\nextra = 1\n",
        ] {
            assert!(RunConfig::from_toml(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn halving_sequence_is_sorted() {
        let c = CouplingSection { v0: None, start: Some(-0.08), halvings: Some(4) };
        assert_eq!(c.values().unwrap(), vec![-0.08, -0.04, -0.02, -0.01, -0.005]);
        let c = CouplingSection { v0: Some(vec![0.01, -0.08, 0.08, -0.01]), start: None, halvings: None };
        assert_eq!(c.values().unwrap(), vec![-0.08, 0.08, -0.01, 0.01]);
    }
}
