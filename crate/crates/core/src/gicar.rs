//! Classical Rényi divergences of measures on `[0, 1]` and the binomial
//! mixtures describing trace states of the GICAR algebra at level `n`.
//!
//! A [`UnitIntervalMeasure`] is a finite atomic part plus an optional density
//! sampled on a shared 256-node Gauss–Legendre grid. The two parts are treated
//! as mutually singular.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::divergences::{log_sum_exp, ExtReal};
use crate::error::{Error, Result};

pub const QUADRATURE_NODES: usize = 256;

const ATOM_MERGE_TOL: f64 = 1e-12;

/// Gauss–Legendre nodes and weights mapped to `[0, 1]`.
pub fn quadrature() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let rule = GaussLegendre::new(NonZeroUsize::new(QUADRATURE_NODES).expect("nonzero"));
        let mut pts: Vec<(f64, f64)> = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitIntervalMeasure {
    atoms: Vec<(f64, f64)>,
    /// Density values at the quadrature nodes.
    density: Option<Vec<f64>>,
}

impl UnitIntervalMeasure {
    pub fn new(atoms: Vec<(f64, f64)>, density: Option<Vec<f64>>) -> Result<Self> {
        let mut atoms = atoms;
        for &(x, m) in &atoms {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidMeasure(format!("atom location {x} outside [0, 1]")));
            }
            if !m.is_finite() || m <= 0.0 {
                return Err(Error::InvalidMeasure(format!("atom mass {m} must be positive")));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        if atoms.windows(2).any(|w| w[1].0 - w[0].0 <= ATOM_MERGE_TOL) {
            return Err(Error::InvalidMeasure("atom locations must be distinct".into()));
        }
        if let Some(f) = &density {
            if f.len() != QUADRATURE_NODES {
                return Err(Error::InvalidMeasure(format!(
                    "density needs {QUADRATURE_NODES} node values, got {}",
                    f.len()
                )));
            }
            if f.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidMeasure("density values must be finite and nonnegative".into()));
            }
        }
        Ok(Self { atoms, density })
    }

    pub fn atomic(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(atoms, None)
    }

    /// `mass` times Lebesgue measure on `[0, 1]`.
    pub fn uniform(mass: f64) -> Result<Self> {
        Self::new(Vec::new(), Some(vec![mass; QUADRATURE_NODES]))
    }

    /// Density given pointwise.
    pub fn from_density_fn(f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(Vec::new(), Some(quadrature().iter().map(|&(x, _)| f(x)).collect()))
    }

    /// Density given by samples `(x_i, f_i)`, linearly interpolated onto the
    /// quadrature grid and held constant beyond the sampled range.
    pub fn from_samples(xs: &[f64], fs: &[f64]) -> Result<Self> {
        if xs.len() != fs.len() || xs.is_empty() {
            return Err(Error::InvalidMeasure("samples need matching nonempty x and f".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMeasure("sample locations must be increasing".into()));
        }
        Self::from_density_fn(|x| {
            let i = xs.partition_point(|&s| s <= x);
            if i == 0 {
                fs[0]
            } else if i == xs.len() {
                fs[xs.len() - 1]
            } else {
                let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
                fs[i - 1] * (1.0 - t) + fs[i] * t
            }
        })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&[f64]> {
        self.density.as_deref()
    }

    pub fn total_mass(&self) -> f64 {
        let a: f64 = self.atoms.iter().map(|a| a.1).sum();
        let c: f64 = self
            .density
            .as_ref()
            .map(|f| quadrature().iter().zip(f).map(|(&(_, w), v)| w * v).sum())
            .unwrap_or(0.0);
        a + c
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= 1e-10
    }

    /// `(ln weight, location)` pairs of the atoms and the quadrature points
    /// where the density is positive.
    fn log_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let atoms = self.atoms.iter().map(|&(x, m)| (m.ln(), x));
        let dens = self.density.iter().flat_map(|f| {
            quadrature().iter().zip(f).filter(|(_, v)| **v > 0.0).map(|(&(x, w), v)| ((w * v).ln(), x))
        });
        atoms.chain(dens)
    }
}

/// `k ln λ + (n − k) ln(1 − λ)` with `0 ln 0 = 0`.
fn log_bernstein(x: f64, n: usize, k: usize) -> f64 {
    let a = if k == 0 { 0.0 } else { k as f64 * x.ln() };
    let b = if n == k { 0.0 } else { (n - k) as f64 * (1.0 - x).ln() };
    a + b
}

/// `ln ∫ λ^k (1 − λ)^{n−k} dμ(λ)`; `−∞` when the integral vanishes.
pub fn binom_moment(mu: &UnitIntervalMeasure, n: usize, k: usize) -> Result<f64> {
    if k > n {
        return Err(Error::BadIndex { n, k });
    }
    Ok(log_sum_exp(mu.log_points().map(|(lw, x)| lw + log_bernstein(x, n, k))))
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 && alpha != 1.0 {
        Ok(())
    } else {
        Err(Error::BadAlpha(alpha))
    }
}

/// `ln(a^α b^{1−α})` for log masses, with the classical conventions.
/// `Err(())` signals a `+∞` contribution.
fn log_term(la: f64, lb: f64, alpha: f64) -> std::result::Result<f64, ()> {
    if la == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    if lb == f64::NEG_INFINITY {
        return if alpha > 1.0 { Err(()) } else { Ok(f64::NEG_INFINITY) };
    }
    if alpha == 0.0 {
        return Ok(lb);
    }
    Ok(alpha * la + (1.0 - alpha) * lb)
}

/// `Σ_k C(n,k) M₁(n,k)^α M₂(n,k)^{1−α}` with `M_i(n,k) = ∫ λ^k (1 − λ)^{n−k} dμ_i`.
pub fn gicar_q(mu1: &UnitIntervalMeasure, mu2: &UnitIntervalMeasure, n: usize, alpha: f64) -> Result<ExtReal> {
    check_alpha(alpha)?;
    let mut logs = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let m1 = binom_moment(mu1, n, k)?;
        let m2 = binom_moment(mu2, n, k)?;
        match log_term(m1, m2, alpha) {
            Ok(t) => logs.push(ln_binomial(n, k) + t),
            Err(()) => return Ok(ExtReal::PosInf),
        }
    }
    Ok(ExtReal::from_f64(log_sum_exp(logs)).exp())
}

/// `∫ (dμ₁/dν)^α (dμ₂/dν)^{1−α} dν` with `ν = μ₁ + μ₂`: exact on the merged
/// atoms, by the shared quadrature on the densities.
pub fn classical_renyi_q(mu1: &UnitIntervalMeasure, mu2: &UnitIntervalMeasure, alpha: f64) -> Result<ExtReal> {
    check_alpha(alpha)?;
    let mut logs = Vec::new();
    let mut push = |a: f64, b: f64, w: f64| -> bool {
        let la = if a > 0.0 { a.ln() } else { f64::NEG_INFINITY };
        let lb = if b > 0.0 { b.ln() } else { f64::NEG_INFINITY };
        match log_term(la, lb, alpha) {
            Ok(t) => {
                logs.push(w.ln() + t);
                true
            }
            Err(()) => false,
        }
    };

    let (a1, a2) = (mu1.atoms(), mu2.atoms());
    let (mut i, mut j) = (0, 0);
    while i < a1.len() || j < a2.len() {
        let take = match (a1.get(i), a2.get(j)) {
            (Some(x), Some(y)) if (x.0 - y.0).abs() <= ATOM_MERGE_TOL => (Some(x.1), Some(y.1)),
            (Some(x), Some(y)) if x.0 < y.0 => (Some(x.1), None),
            (Some(_), Some(y)) => (None, Some(y.1)),
            (Some(x), None) => (Some(x.1), None),
            (None, Some(y)) => (None, Some(y.1)),
            (None, None) => unreachable!(),
        };
        if take.0.is_some() {
            i += 1;
        }
        if take.1.is_some() {
            j += 1;
        }
        if !push(take.0.unwrap_or(0.0), take.1.unwrap_or(0.0), 1.0) {
            return Ok(ExtReal::PosInf);
        }
    }

    let zeros = vec![0.0; QUADRATURE_NODES];
    if mu1.density().is_some() || mu2.density().is_some() {
        let f1 = mu1.density().unwrap_or(&zeros);
        let f2 = mu2.density().unwrap_or(&zeros);
        for (k, &(_, w)) in quadrature().iter().enumerate() {
            if !push(f1[k], f2[k], w) {
                return Ok(ExtReal::PosInf);
            }
        }
    }
    Ok(ExtReal::from_f64(log_sum_exp(logs)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergencePoint {
    pub n: usize,
    pub gicar_q: ExtReal,
    pub gap: f64,
}

/// `gicar_q(n)` and its distance to the classical limit over `n_list`.
pub fn gicar_convergence(
    mu1: &UnitIntervalMeasure,
    mu2: &UnitIntervalMeasure,
    alpha: f64,
    n_list: &[usize],
) -> Result<Vec<ConvergencePoint>> {
    let target = classical_renyi_q(mu1, mu2, alpha)?.finite().ok_or(Error::Infinite("classical Rényi limit"))?;
    n_list
        .iter()
        .map(|&n| {
            let q = gicar_q(mu1, mu2, n, alpha)?;
            let gap = match q {
                ExtReal::Finite(v) => (v - target).abs(),
                _ => f64::INFINITY,
            };
            Ok(ConvergencePoint { n, gicar_q: q, gap })
        })
        .collect()
}

/// Wire format: `{"atoms": [[λ, mass], …], "density": {"kind": "uniform", "mass": m}
/// | {"kind": "samples", "x": […], "f": […]}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureSpec {
    #[serde(default)]
    pub atoms: Vec<[f64; 2]>,
    #[serde(default)]
    pub density: Option<DensitySpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DensitySpec {
    Uniform {
        #[serde(default = "unit_mass")]
        mass: f64,
    },
    Samples {
        x: Vec<f64>,
        f: Vec<f64>,
    },
}

fn unit_mass() -> f64 {
    1.0
}

impl TryFrom<MeasureSpec> for UnitIntervalMeasure {
    type Error = Error;

    fn try_from(spec: MeasureSpec) -> Result<Self> {
        let atoms: Vec<(f64, f64)> = spec.atoms.iter().map(|a| (a[0], a[1])).collect();
        let density = match spec.density {
            None => None,
            Some(DensitySpec::Uniform { mass }) => Some(vec![mass; QUADRATURE_NODES]),
            Some(DensitySpec::Samples { x, f }) => UnitIntervalMeasure::from_samples(&x, &f)?.density,
        };
        UnitIntervalMeasure::new(atoms, density)
    }
}
