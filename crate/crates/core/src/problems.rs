//! Benchmark dynamics for the minimum-time problem `sup_a { -f(x,a) . grad T } = 1`.
//!
//! The five catalog entries share the target `{(0,0)}` and differ only in
//! the speed profile multiplying the control direction.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schemes::{geometry, Geometry, Scheme};

/// Unit control directions `(cos 2πk/n, sin 2πk/n)`, `k = 0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSet {
    directions: Vec<[f64; 2]>,
    // stencil geometry of each direction, per scheme
    geometry: [Vec<Geometry>; 2],
}

pub const DEFAULT_CONTROLS: usize = 64;

impl ControlSet {
    pub fn new(nc: usize) -> Result<Self> {
        if nc < 4 {
            return Err(Error::TooFewControls(nc));
        }
        let directions: Vec<[f64; 2]> = (0..nc)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / nc as f64;
                [t.cos(), t.sin()]
            })
            .collect();
        let table = |scheme| directions.iter().map(|&d| geometry(d, scheme)).collect();
        let geometry = [table(Scheme::Sl2p), table(Scheme::Sl3p)];
        Ok(ControlSet { directions, geometry })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn directions(&self) -> &[[f64; 2]] {
        &self.directions
    }

    #[inline]
    pub fn get(&self, k: usize) -> [f64; 2] {
        self.directions[k]
    }

    #[inline]
    pub(crate) fn geometry(&self, k: usize, scheme: Scheme) -> &Geometry {
        &self.geometry[scheme as usize][k]
    }
}

impl Default for ControlSet {
    fn default() -> Self {
        ControlSet::new(DEFAULT_CONTROLS).expect("default control count is valid")
    }
}

/// `m(a) = (1 + (lambda a1 + mu a2)^2)^(-1/2)`.
#[inline]
pub fn anisotropy_profile(a: [f64; 2], lambda: f64, mu: f64) -> f64 {
    let s = lambda * a[0] + mu * a[1];
    1.0 / (1.0 + s * s).sqrt()
}

/// Catalog class: whether characteristics share grid simplices with the
/// gradient lines (ISO) and whether they never cross (REG).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemClass {
    pub iso: bool,
    pub reg: bool,
}

impl fmt::Display for ProblemClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let neg = |b: bool| if b { "" } else { "¬" };
        write!(f, "{}ISO & {}REG", neg(self.iso), neg(self.reg))
    }
}

/// Identifier of a catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Catalog {
    #[serde(rename = "HJB-A")]
    A,
    #[serde(rename = "HJB-B")]
    B,
    #[serde(rename = "HJB-C")]
    C,
    #[serde(rename = "HJB-D")]
    D,
    #[serde(rename = "HJB-E")]
    E,
}

impl Catalog {
    pub const ALL: [Catalog; 5] = [Catalog::A, Catalog::B, Catalog::C, Catalog::D, Catalog::E];

    pub fn name(self) -> &'static str {
        match self {
            Catalog::A => "HJB-A",
            Catalog::B => "HJB-B",
            Catalog::C => "HJB-C",
            Catalog::D => "HJB-D",
            Catalog::E => "HJB-E",
        }
    }

    pub fn class(self) -> ProblemClass {
        let (iso, reg) = match self {
            Catalog::A => (true, true),
            Catalog::B => (true, false),
            Catalog::C => (false, true),
            Catalog::D | Catalog::E => (false, false),
        };
        ProblemClass { iso, reg }
    }
}

impl fmt::Display for Catalog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Catalog {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace('_', "-");
        let key = key.strip_prefix("HJB-").unwrap_or(&key);
        match key {
            "A" => Ok(Catalog::A),
            "B" => Ok(Catalog::B),
            "C" => Ok(Catalog::C),
            "D" => Ok(Catalog::D),
            "E" => Ok(Catalog::E),
            _ => Err(Error::UnknownProblem(s.to_string())),
        }
    }
}

/// Parameters shared by the catalog dynamics. Entries ignore the ones they
/// do not use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub lambda: f64,
    pub mu: f64,
    pub eps: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            lambda: 6.0,
            mu: 5.0,
            eps: 0.02,
        }
    }
}

pub type DynamicsFn = dyn Fn([f64; 2], [f64; 2]) -> [f64; 2] + Send + Sync;

#[derive(Clone)]
enum Model {
    Catalog(Catalog),
    Custom(Arc<DynamicsFn>),
}

/// A minimum-time problem: dynamics `f(x, a)`, target points and class.
#[derive(Clone)]
pub struct Problem {
    name: String,
    model: Model,
    pub params: Params,
    pub class: ProblemClass,
    pub target: Vec<[f64; 2]>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("class", &self.class)
            .field("target", &self.target)
            .finish()
    }
}

impl Problem {
    /// Catalog problem by name (`HJB-A` .. `HJB-E`, case-insensitive).
    pub fn builtin(name: &str, params: Params) -> Result<Self> {
        Ok(Problem::catalog(name.parse()?, params))
    }

    pub fn catalog(which: Catalog, params: Params) -> Self {
        Problem {
            name: which.name().to_string(),
            model: Model::Catalog(which),
            params,
            class: which.class(),
            target: vec![[0.0, 0.0]],
        }
    }

    /// User dynamics. `f` must be deterministic and nonvanishing on the domain.
    pub fn custom<F>(name: impl Into<String>, class: ProblemClass, target: Vec<[f64; 2]>, f: F) -> Self
    where
        F: Fn([f64; 2], [f64; 2]) -> [f64; 2] + Send + Sync + 'static,
    {
        Problem {
            name: name.into(),
            model: Model::Custom(Arc::new(f)),
            params: Params {
                lambda: 0.0,
                mu: 0.0,
                eps: 0.0,
            },
            class,
            target,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn catalog_entry(&self) -> Option<Catalog> {
        match self.model {
            Model::Catalog(c) => Some(c),
            Model::Custom(_) => None,
        }
    }

    /// Scalar speed `s(x, a)` when the dynamics have the form
    /// `f(x, a) = s(x, a) a` (all catalog problems); `None` for user dynamics.
    #[inline]
    pub fn speed(&self, x: [f64; 2], a: [f64; 2]) -> Option<f64> {
        let Params { lambda, mu, eps } = self.params;
        let s = match &self.model {
            Model::Catalog(Catalog::A) => 1.0,
            Model::Catalog(Catalog::B) => {
                if x[0] > 1.0 {
                    2.0
                } else {
                    1.0
                }
            }
            Model::Catalog(Catalog::C) => anisotropy_profile(a, lambda, mu),
            Model::Catalog(Catalog::D) => {
                let bump = if x[0] > 1.0 { eps * (x[0] - 1.0) } else { 0.0 };
                anisotropy_profile(a, lambda, mu) + bump
            }
            Model::Catalog(Catalog::E) => (1.0 + (x[0] + x[1]).abs()) * anisotropy_profile(a, lambda, mu),
            Model::Custom(_) => return None,
        };
        Some(s)
    }

    /// `f(x, a)`.
    #[inline]
    pub fn velocity(&self, x: [f64; 2], a: [f64; 2]) -> [f64; 2] {
        match (&self.model, self.speed(x, a)) {
            (Model::Custom(f), _) => f(x, a),
            (_, Some(s)) => [s * a[0], s * a[1]],
            (_, None) => unreachable!("catalog dynamics always have a scalar speed"),
        }
    }

    /// Stable key identifying the dynamics, used for reference caching.
    pub fn cache_key(&self) -> String {
        let Params { lambda, mu, eps } = self.params;
        format!("{}_l{}_m{}_e{}", self.name, lambda, mu, eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(v: [f64; 2]) -> f64 {
        v[0].hypot(v[1])
    }

    #[test]
    fn profile_values() {
        assert!((anisotropy_profile([1.0, 0.0], 6.0, 5.0) - 37f64.powf(-0.5)).abs() < 1e-15);
        assert!((anisotropy_profile([1.0, 0.0], 6.0, 5.0) - 0.16440).abs() < 5e-6);
        let r = 61f64.sqrt();
        assert!((anisotropy_profile([5.0 / r, -6.0 / r], 6.0, 5.0) - 1.0).abs() < 1e-15);
        assert_eq!(anisotropy_profile([0.6, 0.8], 0.0, 0.0), 1.0);
    }

    #[test]
    fn catalog_dynamics() {
        let p = Params::default();
        let b = Problem::builtin("HJB-B", p).unwrap();
        assert_eq!(b.velocity([1.5, 0.0], [1.0, 0.0]), [2.0, 0.0]);
        assert_eq!(b.velocity([1.0, 0.0], [1.0, 0.0]), [1.0, 0.0]);
        let a = Problem::builtin("hjb-a", p).unwrap();
        assert_eq!(a.velocity([0.3, -1.2], [0.0, 1.0]), [0.0, 1.0]);
        let e = Problem::builtin("HJB-E", p).unwrap();
        let f = e.velocity([0.0, 0.0], [1.0, 0.0]);
        assert!((f[0] - 37f64.powf(-0.5)).abs() < 1e-15);
        assert_eq!(f[1], 0.0);
    }

    #[test]
    fn catalog_classes() {
        let p = Params::default();
        let class = |n: &str| Problem::builtin(n, p).unwrap().class;
        assert_eq!(class("HJB-A"), ProblemClass { iso: true, reg: true });
        assert_eq!(class("HJB-C"), ProblemClass { iso: false, reg: true });
        assert_eq!(class("HJB-E"), ProblemClass { iso: false, reg: false });
        assert_eq!(class("HJB-E").to_string(), "¬ISO & ¬REG");
        assert!(matches!(
            Problem::builtin("HJB-Z", p),
            Err(Error::UnknownProblem(_))
        ));
    }

    #[test]
    fn control_set_is_unit_and_distinct() {
        for nc in [4, 6, 64, 100, 4096] {
            let cs = ControlSet::new(nc).unwrap();
            assert_eq!(cs.len(), nc);
            for (k, &a) in cs.directions().iter().enumerate() {
                assert!((norm(a) - 1.0).abs() < 1e-14, "nc={nc} k={k}");
                let t = 2.0 * PI * k as f64 / nc as f64;
                assert!((a[0] - t.cos()).abs() < 1e-14 && (a[1] - t.sin()).abs() < 1e-14);
            }
            for i in 0..nc {
                for j in 0..i {
                    assert_ne!(cs.get(i), cs.get(j));
                }
            }
        }
        let cs = ControlSet::new(64).unwrap();
        assert_eq!(cs.get(0), [1.0, 0.0]);
        // axis directions carry the usual cos/sin rounding residue
        assert!(cs.get(32)[0] == -1.0 && cs.get(32)[1].abs() < 1e-15);
        assert!(ControlSet::new(3).is_err());
    }

    #[test]
    fn speeds_positive_and_bounded_on_domain() {
        let cs = ControlSet::default();
        for which in Catalog::ALL {
            for params in [Params::default(), Params { lambda: 10.0, mu: 5.0, eps: 0.02 }] {
                let p = Problem::catalog(which, params);
                let mut max_speed: f64 = 0.0;
                for ix in 0..=40 {
                    for iy in 0..=40 {
                        let x = [-2.0 + 0.1 * ix as f64, -2.0 + 0.1 * iy as f64];
                        for &a in cs.directions() {
                            let s = norm(p.velocity(x, a));
                            assert!(s > 0.0, "{which} at {x:?}");
                            max_speed = max_speed.max(s);
                        }
                    }
                }
                assert!(max_speed.is_finite() && max_speed <= 5.0);
            }
        }
    }

    #[test]
    fn hjb_b_speed_is_piecewise_constant() {
        let p = Problem::catalog(Catalog::B, Params::default());
        let cs = ControlSet::default();
        for ix in 0..=80 {
            let x = -2.0 + 0.05 * ix as f64;
            for &a in cs.directions() {
                let s = norm(p.velocity([x, 0.7], a));
                let expected = if x > 1.0 { 2.0 } else { 1.0 };
                assert!((s - expected).abs() < 1e-15);
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn profile_even_in_direction(t in 0.0f64..(2.0 * PI), l in -12.0f64..12.0, m in -12.0f64..12.0) {
            let a = [t.cos(), t.sin()];
            let v = anisotropy_profile(a, l, m);
            proptest::prop_assert_eq!(v, anisotropy_profile([-a[0], -a[1]], l, m));
            proptest::prop_assert!(v > 0.0 && v <= 1.0);
        }
    }
}
