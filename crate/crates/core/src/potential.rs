//! Pair-potential shapes `f(ξ)`, their momentum transforms `F(p) = ∫ dξ e^{-ipξ} f(ξ)`
//! and the weak-coupling classification.
//!
//! * type I: `F(0) ≠ 0`, bound state `q0 ≈ -v0 F(0)` (needs `v0 F(0) < 0`);
//! * type II: `F(0) = 0`, bound for either sign, `q0 ≈ v0² J / π` with
//!   `J = ∫ dp |F(p)|²/p²`;
//! * contact: `f = δ(ξ)`, `F ≡ 1`.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::{integrate_breaks, integrate_half_line};

const TOL_ZERO: f64 = 1e-12;
const AMBIGUOUS: f64 = 1e-8;
const QUAD_REL: f64 = 1e-10;
const QUAD_ABS: f64 = 1e-13;
// Beyond |p| w = 60 the tanh-gaussian transform is below 1e-40 (nearest poles at ±iπw/2).
const TANH_GAUSSIAN_CUT: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum ShapeKind {
    #[serde(rename = "contact")]
    Contact,
    #[serde(rename = "type-I")]
    TypeI,
    #[serde(rename = "type-II")]
    TypeII,
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShapeKind::Contact => "contact",
            ShapeKind::TypeI => "type-I",
            ShapeKind::TypeII => "type-II",
        })
    }
}

/// User-supplied profile for shapes outside the catalog.
pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Profile {
    Contact,
    /// `e^{-(ξ-a)²/w²}`
    Gaussian {
        width: f64,
        shift: f64,
    },
    /// `(1 - 2(ξ-a)²/w²) e^{-(ξ-a)²/w²}`
    MexicanHat {
        width: f64,
        shift: f64,
    },
    /// `e^{-|ξ-a|/w}`
    Exponential {
        width: f64,
        shift: f64,
    },
    /// `e^{-ξ²/w²} (1 + κ ξ/w)`
    SkewGaussian {
        width: f64,
        skew: f64,
    },
    /// `(1 - 2ξ²/w² + κ ξ/w) e^{-ξ²/w²}`
    SkewMexicanHat {
        width: f64,
        skew: f64,
    },
    /// `e^{-ξ²/w²} (1 + κ tanh(ξ/w))`, transform by quadrature only.
    TanhGaussian {
        width: f64,
        skew: f64,
    },
    /// Arbitrary profile supported (to negligible tails) inside `|ξ| ≤ support`.
    Custom {
        f: ProfileFn,
        support: f64,
    },
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Contact => write!(f, "Contact"),
            Profile::Gaussian { width, shift } => write!(f, "Gaussian(w={width}, a={shift})"),
            Profile::MexicanHat { width, shift } => write!(f, "MexicanHat(w={width}, a={shift})"),
            Profile::Exponential { width, shift } => write!(f, "Exponential(w={width}, a={shift})"),
            Profile::SkewGaussian { width, skew } => write!(f, "SkewGaussian(w={width}, k={skew})"),
            Profile::SkewMexicanHat { width, skew } => write!(f, "SkewMexicanHat(w={width}, k={skew})"),
            Profile::TanhGaussian { width, skew } => write!(f, "TanhGaussian(w={width}, k={skew})"),
            Profile::Custom { support, .. } => write!(f, "Custom(support={support})"),
        }
    }
}

/// Memo of quadrature transforms keyed by the bit pattern of `p`.
#[derive(Debug, Default)]
pub struct TransformCache {
    map: RwLock<HashMap<u64, C64>>,
}

impl TransformCache {
    fn get_or_insert<F: FnOnce() -> Result<C64>>(&self, p: f64, f: F) -> Result<C64> {
        let key = p.to_bits();
        if let Some(v) = self.map.read().expect("transform cache poisoned").get(&key) {
            return Ok(*v);
        }
        let v = f()?;
        self.map.write().expect("transform cache poisoned").insert(key, v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("transform cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A classified potential shape.
#[derive(Clone)]
pub struct Shape {
    pub name: String,
    pub kind: ShapeKind,
    pub params: BTreeMap<String, f64>,
    profile: Profile,
    cache: Arc<TransformCache>,
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Shape")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("params", &self.params)
            .field("profile", &self.profile)
            .finish()
    }
}

/// Catalog names accepted by [`Shape::by_name`].
pub const CATALOG: &[&str] = &[
    "contact",
    "gaussian",
    "mexican-hat",
    "exponential",
    "shifted-gaussian",
    "shifted-mexican-hat",
    "shifted-exponential",
    "skew-gaussian",
    "skew-mexican-hat",
    "tanh-gaussian",
];

impl Shape {
    /// Builds and classifies a shape from a profile.
    pub fn new(name: impl Into<String>, profile: Profile, params: BTreeMap<String, f64>) -> Result<Self> {
        let mut shape = Shape {
            name: name.into(),
            kind: ShapeKind::Contact,
            params,
            profile,
            cache: Arc::new(TransformCache::default()),
        };
        shape.kind = shape.classify()?;
        Ok(shape)
    }

    /// Catalog entry with optional parameter overrides (`width`, `shift`, `skew`).
    pub fn by_name(name: &str, overrides: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |k: &str, d: f64| overrides.get(k).copied().unwrap_or(d);
        for k in overrides.keys() {
            if !matches!(k.as_str(), "width" | "shift" | "skew") {
                return Err(Error::Config(format!("unknown shape parameter `{k}`")));
            }
        }
        let width = get("width", 1.0);
        if !(width > 0.0) {
            return Err(Error::Config(format!("shape width must be positive, got {width}")));
        }
        let (profile, params): (Profile, Vec<(&str, f64)>) = match name {
            "contact" => (Profile::Contact, vec![]),
            "gaussian" | "shifted-gaussian" => {
                let shift = get("shift", if name == "gaussian" { 0.0 } else { 0.5 });
                (Profile::Gaussian { width, shift }, vec![("width", width), ("shift", shift)])
            }
            "mexican-hat" | "shifted-mexican-hat" => {
                let shift = get("shift", if name == "mexican-hat" { 0.0 } else { 0.5 });
                (Profile::MexicanHat { width, shift }, vec![("width", width), ("shift", shift)])
            }
            "exponential" | "shifted-exponential" => {
                let shift = get("shift", if name == "exponential" { 0.0 } else { 0.5 });
                (Profile::Exponential { width, shift }, vec![("width", width), ("shift", shift)])
            }
            "skew-gaussian" => {
                let skew = get("skew", 0.5);
                (Profile::SkewGaussian { width, skew }, vec![("width", width), ("skew", skew)])
            }
            "skew-mexican-hat" => {
                let skew = get("skew", 0.5);
                (Profile::SkewMexicanHat { width, skew }, vec![("width", width), ("skew", skew)])
            }
            "tanh-gaussian" => {
                let skew = get("skew", 0.5);
                (Profile::TanhGaussian { width, skew }, vec![("width", width), ("skew", skew)])
            }
            other => return Err(Error::UnknownShape(other.to_string())),
        };
        let params = params.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        Shape::new(name, profile, params)
    }

    /// All catalog shapes with default parameters.
    pub fn catalog() -> Vec<Shape> {
        CATALOG.iter().map(|n| Shape::by_name(n, &BTreeMap::new()).expect("catalog shapes classify")).collect()
    }

    pub fn custom(name: impl Into<String>, f: ProfileFn, support: f64) -> Result<Self> {
        Shape::new(name, Profile::Custom { f, support }, BTreeMap::from([("support".to_string(), support)]))
    }

    pub fn profile_kind(&self) -> &Profile {
        &self.profile
    }

    pub fn is_contact(&self) -> bool {
        matches!(self.profile, Profile::Contact)
    }

    /// `f(ξ)`; undefined for the contact shape.
    pub fn profile(&self, xi: f64) -> Result<f64> {
        Ok(match &self.profile {
            Profile::Contact => return Err(Error::Domain("the contact profile is a delta function".into())),
            Profile::Gaussian { width, shift } => {
                let x = (xi - shift) / width;
                (-x * x).exp()
            }
            Profile::MexicanHat { width, shift } => {
                let x = (xi - shift) / width;
                (1.0 - 2.0 * x * x) * (-x * x).exp()
            }
            Profile::Exponential { width, shift } => (-((xi - shift) / width).abs()).exp(),
            Profile::SkewGaussian { width, skew } => {
                let x = xi / width;
                (-x * x).exp() * (1.0 + skew * x)
            }
            Profile::SkewMexicanHat { width, skew } => {
                let x = xi / width;
                (1.0 - 2.0 * x * x + skew * x) * (-x * x).exp()
            }
            Profile::TanhGaussian { width, skew } => {
                let x = xi / width;
                (-x * x).exp() * (1.0 + skew * x.tanh())
            }
            Profile::Custom { f, .. } => f(xi),
        })
    }

    /// Whether `F(p)` is real for all `p` (profile symmetric about the origin).
    pub fn has_real_transform(&self) -> bool {
        match &self.profile {
            Profile::Contact => true,
            Profile::Gaussian { shift, .. }
            | Profile::MexicanHat { shift, .. }
            | Profile::Exponential { shift, .. } => *shift == 0.0,
            Profile::SkewGaussian { skew, .. }
            | Profile::SkewMexicanHat { skew, .. }
            | Profile::TanhGaussian { skew, .. } => *skew == 0.0,
            Profile::Custom { .. } => false,
        }
    }

    /// Whether a closed-form transform is available.
    pub fn has_closed_form(&self) -> bool {
        !matches!(self.profile, Profile::TanhGaussian { .. } | Profile::Custom { .. })
    }

    /// `F(p)`.
    pub fn transform(&self, p: f64) -> Result<C64> {
        let phase = |a: f64| if a == 0.0 { C64::new(1.0, 0.0) } else { C64::from_polar(1.0, -p * a) };
        Ok(match &self.profile {
            Profile::Contact => C64::new(1.0, 0.0),
            Profile::Gaussian { width: w, shift } => phase(*shift) * (w * PI.sqrt() * (-0.25 * p * p * w * w).exp()),
            Profile::MexicanHat { width: w, shift } => {
                let pw = p * w;
                phase(*shift) * (w * PI.sqrt() * 0.5 * pw * pw * (-0.25 * pw * pw).exp())
            }
            Profile::Exponential { width: w, shift } => phase(*shift) * (2.0 * w / (1.0 + p * p * w * w)),
            Profile::SkewGaussian { width: w, skew } => {
                let pw = p * w;
                C64::new(1.0, -0.5 * skew * pw) * (w * PI.sqrt() * (-0.25 * pw * pw).exp())
            }
            Profile::SkewMexicanHat { width: w, skew } => {
                let pw = p * w;
                C64::new(0.5 * pw * pw, -0.5 * skew * pw) * (w * PI.sqrt() * (-0.25 * pw * pw).exp())
            }
            Profile::TanhGaussian { width, .. } if p.abs() * width > TANH_GAUSSIAN_CUT => C64::new(0.0, 0.0),
            Profile::TanhGaussian { .. } | Profile::Custom { .. } => {
                // f is real, so F(-p) = F(p)*
                let v = self.cache.get_or_insert(p.abs(), || self.quadrature_transform(p.abs()))?;
                return Ok(if p < 0.0 { v.conj() } else { v });
            }
        })
    }

    /// Transforms at several momenta.
    pub fn transform_many(&self, ps: &[f64]) -> Result<Vec<C64>> {
        ps.iter().map(|&p| self.transform(p)).collect()
    }

    /// Number of memoized quadrature transforms.
    pub fn cached_transforms(&self) -> usize {
        self.cache.len()
    }

    /// `F(0) = ∫ f`.
    pub fn f0(&self) -> Result<f64> {
        Ok(self.transform(0.0)?.re)
    }

    /// Mirror image `f(-ξ)`.
    pub fn mirrored(&self) -> Result<Shape> {
        let profile = match &self.profile {
            Profile::Contact => Profile::Contact,
            Profile::Gaussian { width, shift } => Profile::Gaussian { width: *width, shift: -shift },
            Profile::MexicanHat { width, shift } => Profile::MexicanHat { width: *width, shift: -shift },
            Profile::Exponential { width, shift } => Profile::Exponential { width: *width, shift: -shift },
            Profile::SkewGaussian { width, skew } => Profile::SkewGaussian { width: *width, skew: -skew },
            Profile::SkewMexicanHat { width, skew } => Profile::SkewMexicanHat { width: *width, skew: -skew },
            Profile::TanhGaussian { width, skew } => Profile::TanhGaussian { width: *width, skew: -skew },
            Profile::Custom { f, support } => {
                let g = f.clone();
                Profile::Custom { f: Arc::new(move |x| g(-x)), support: *support }
            }
        };
        let mut params = self.params.clone();
        for k in ["shift", "skew"] {
            if let Some(v) = params.get_mut(k) {
                *v = -*v;
            }
        }
        Shape::new(format!("{}-mirrored", self.name), profile, params)
    }

    /// `J = ∫ dp |F(p)|²/p²` (type II only).
    pub fn moment_j(&self) -> Result<f64> {
        if self.kind != ShapeKind::TypeII {
            return Err(Error::Domain(format!("moment J diverges for {} shape `{}`", self.kind, self.name)));
        }
        let w = self.length_scale();
        let p_small = 1e-3 / w;
        let series = if self.has_closed_form() { None } else { Some(self.small_p_series()?) };
        let g = |p: f64| -> f64 {
            let fp = match (&series, p < p_small) {
                (Some(m), true) => {
                    let ip = C64::new(0.0, -p);
                    ip * m[1] + ip * ip * m[2] / 2.0 + ip * ip * ip * m[3] / 6.0
                }
                _ => self.transform(p).unwrap_or(C64::new(f64::NAN, 0.0)),
            };
            fp.norm_sqr() / (p * p)
        };
        let inner = integrate_breaks(g, &[0.0, p_small, 1.0 / w, 4.0 / w], QUAD_REL, 1e-14)?;
        let outer = integrate_half_line(g, 4.0 / w, 1.0 / w, QUAD_REL, 1e-14)?;
        let j = 2.0 * (inner.value + outer.value);
        if !j.is_finite() {
            return Err(Error::Domain(format!("moment J is not finite for `{}`", self.name)));
        }
        Ok(j)
    }

    /// Characteristic length of the profile (its width, 1 for contact).
    pub fn length_scale(&self) -> f64 {
        match &self.profile {
            Profile::Contact => 1.0,
            Profile::Gaussian { width, .. }
            | Profile::MexicanHat { width, .. }
            | Profile::Exponential { width, .. }
            | Profile::SkewGaussian { width, .. }
            | Profile::SkewMexicanHat { width, .. }
            | Profile::TanhGaussian { width, .. } => *width,
            Profile::Custom { support, .. } => support / 8.0,
        }
    }

    fn support(&self) -> (f64, f64, Vec<f64>) {
        match &self.profile {
            Profile::Contact => (0.0, 0.0, vec![]),
            Profile::Gaussian { width, shift } | Profile::MexicanHat { width, shift } => {
                (shift - 10.0 * width, shift + 10.0 * width, vec![*shift])
            }
            Profile::Exponential { width, shift } => (shift - 45.0 * width, shift + 45.0 * width, vec![*shift]),
            Profile::SkewGaussian { width, .. }
            | Profile::SkewMexicanHat { width, .. }
            | Profile::TanhGaussian { width, .. } => (-10.0 * width, 10.0 * width, vec![0.0]),
            Profile::Custom { support, .. } => (-support, *support, vec![0.0]),
        }
    }

    fn l1_norm(&self) -> Result<f64> {
        let (a, b, kinks) = self.support();
        let breaks = breaks_with(a, b, &kinks, 0.0);
        Ok(integrate_breaks(|x| self.profile(x).map(f64::abs).unwrap_or(f64::NAN), &breaks, QUAD_REL, 0.0)?.value)
    }

    /// Moments `∫ ξ^k f`, `k = 0..=3`.
    fn small_p_series(&self) -> Result<[f64; 4]> {
        let (a, b, kinks) = self.support();
        let breaks = breaks_with(a, b, &kinks, 0.0);
        let scale = self.l1_norm()?;
        let mut m = [0.0; 4];
        for (k, mk) in m.iter_mut().enumerate() {
            *mk = integrate_breaks(
                |x| x.powi(k as i32) * self.profile(x).unwrap_or(f64::NAN),
                &breaks,
                QUAD_REL,
                1e-15 * scale,
            )?
            .value;
        }
        Ok(m)
    }

    fn quadrature_transform(&self, p: f64) -> Result<C64> {
        let (a, b, kinks) = self.support();
        let scale = self.l1_norm()?;
        let breaks = breaks_with(a, b, &kinks, p);
        let re = integrate_breaks(
            |x| self.profile(x).unwrap_or(f64::NAN) * (p * x).cos(),
            &breaks,
            QUAD_REL,
            QUAD_ABS * scale,
        )?;
        let im = if p == 0.0 {
            0.0
        } else {
            -integrate_breaks(
                |x| self.profile(x).unwrap_or(f64::NAN) * (p * x).sin(),
                &breaks,
                QUAD_REL,
                QUAD_ABS * scale,
            )?
            .value
        };
        Ok(C64::new(re.value, im))
    }

    fn classify(&self) -> Result<ShapeKind> {
        if self.is_contact() {
            return Ok(ShapeKind::Contact);
        }
        let scale = self.l1_norm()?;
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Classification {
                shape: self.name.clone(),
                reason: "profile has no finite L1 norm".into(),
            });
        }
        let f0 = self.f0()?.abs() / scale;
        if f0 > AMBIGUOUS {
            return Ok(ShapeKind::TypeI);
        }
        if f0 > TOL_ZERO {
            return Err(Error::Classification {
                shape: self.name.clone(),
                reason: format!("|F(0)|/‖f‖₁ = {f0:.3e} is neither clearly zero nor clearly nonzero"),
            });
        }
        let w = self.length_scale();
        let r = |p: f64| -> Result<f64> { Ok(self.transform(p)?.norm_sqr() / (p * p)) };
        let (r1, r2) = (r(1e-1 / w)?, r(1e-2 / w)?);
        if r2 > 10.0 * r1 + 1e-20 * scale * scale {
            return Err(Error::Classification {
                shape: self.name.clone(),
                reason: "|F(p)|²/p² is not bounded as p → 0".into(),
            });
        }
        Ok(ShapeKind::TypeII)
    }
}

/// Breakpoints on `[a, b]` containing the kinks and at most about one oscillation of `e^{-ipξ}` each.
fn breaks_with(a: f64, b: f64, kinks: &[f64], p: f64) -> Vec<f64> {
    let n = ((b - a) * p.abs() / PI).ceil().max(4.0) as usize;
    let mut v: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    v.extend(kinks.iter().copied().filter(|&k| k > a && k < b));
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(name: &str) -> Shape {
        Shape::by_name(name, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn classification_of_catalog() {
        let expect = [
            ("contact", ShapeKind::Contact),
            ("gaussian", ShapeKind::TypeI),
            ("mexican-hat", ShapeKind::TypeII),
            ("exponential", ShapeKind::TypeI),
            ("shifted-mexican-hat", ShapeKind::TypeII),
            ("skew-gaussian", ShapeKind::TypeI),
            ("skew-mexican-hat", ShapeKind::TypeII),
            ("tanh-gaussian", ShapeKind::TypeI),
        ];
        for (n, k) in expect {
            assert_eq!(shape(n).kind, k, "{n}");
        }
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for name in CATALOG.iter().filter(|n| **n != "contact" && **n != "tanh-gaussian") {
            let s = shape(name);
            let f = s.clone();
            let support = if name.ends_with("exponential") { 48.0 } else { 12.0 };
            let custom = Shape::custom("c", Arc::new(move |x| f.profile(x).unwrap()), support).unwrap();
            for &p in &[0.0, 0.3, 1.7, 4.0] {
                let a = s.transform(p).unwrap();
                let b = custom.transform(p).unwrap();
                assert!((a - b).norm() < 1e-9, "{name} p={p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn mexican_hat_moment() {
        let j = shape("mexican-hat").moment_j().unwrap();
        assert!((j - PI * (2.0 * PI).sqrt() / 4.0).abs() < 1e-10, "{j}");
        assert!(shape("gaussian").moment_j().is_err());
    }

    #[test]
    fn quadrature_moment_uses_series() {
        let f = shape("mexican-hat");
        let c = Shape::custom("mh", Arc::new(move |x| f.profile(x).unwrap()), 12.0).unwrap();
        assert_eq!(c.kind, ShapeKind::TypeII);
        let j = c.moment_j().unwrap();
        assert!((j - PI * (2.0 * PI).sqrt() / 4.0).abs() < 1e-8, "{j}");
    }

    #[test]
    fn transform_cache_reused() {
        let s = shape("tanh-gaussian");
        let a = s.transform(0.7).unwrap();
        let n = s.cached_transforms();
        let b = s.transform(0.7).unwrap();
        assert_eq!(a, b);
        assert_eq!(n, s.cached_transforms());
    }

    #[test]
    fn ambiguous_zero_is_an_error() {
        let r = Shape::custom(
            "almost",
            Arc::new(|x: f64| (1.0 - 2.0 * x * x) * (-x * x).exp() + 1e-10 * (-x * x).exp()),
            12.0,
        );
        assert!(matches!(r, Err(Error::Classification { .. })));
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(Shape::by_name("square", &BTreeMap::new()), Err(Error::UnknownShape(_))));
    }
}
