//! Closed-form divergences on finite-dimensional direct-sum algebras.
//!
//! States are block-diagonal: an [`FdState`] holds one density per block of
//! `M_{d_1} ⊕ … ⊕ M_{d_m}`. All trace functionals below are additive over
//! blocks, so every quantity is evaluated block by block and then summed
//! (or maximized, for `D_max`).
//!
//! Functionals need not be normalized: `Q*_α(λρ‖μσ) = λ^α μ^{1−α} Q*_α(ρ‖σ)`.

use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};
use crate::linalg::{direct_sum, loewner_leq, tensor, HermMatrix};

/// PSD tolerance for validating state blocks.
pub const STATE_PSD_TOL: f64 = 1e-10;

/// Eigenvalues of the sandwiched operator below this fraction of the largest
/// one are treated as zero.
const SANDWICH_CUTOFF: f64 = 1e-12;

/// Tolerance of the range-containment test `s(ρ) ≤ s(σ)`.
pub const SUPPORT_CONTAINMENT_TOL: f64 = 1e-8;

/// Extended real number in `[−∞, +∞]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    pub fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            ExtReal::PosInf
        } else if x == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(x)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    /// Natural log of a nonnegative extended real; `log 0 = −∞`.
    pub fn ln(self) -> ExtReal {
        match self {
            ExtReal::PosInf => ExtReal::PosInf,
            ExtReal::NegInf => ExtReal::Finite(f64::NAN),
            ExtReal::Finite(x) if x <= 0.0 => ExtReal::NegInf,
            ExtReal::Finite(x) => ExtReal::Finite(x.ln()),
        }
    }

    pub fn exp(self) -> ExtReal {
        match self {
            ExtReal::PosInf => ExtReal::PosInf,
            ExtReal::NegInf => ExtReal::ZERO,
            ExtReal::Finite(x) => ExtReal::from_f64(x.exp()),
        }
    }

    /// Multiplication by a real scalar, with `0 · (±∞) = 0`.
    pub fn scale(self, c: f64) -> ExtReal {
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(c * x),
            _ if c == 0.0 => ExtReal::ZERO,
            ExtReal::PosInf if c > 0.0 => ExtReal::PosInf,
            ExtReal::PosInf => ExtReal::NegInf,
            ExtReal::NegInf if c > 0.0 => ExtReal::NegInf,
            ExtReal::NegInf => ExtReal::PosInf,
        }
    }

    /// `(1/(α−1))·log Q`, flipping infinities for `α < 1`.
    pub fn renyi_from_q(q: ExtReal, alpha: f64) -> ExtReal {
        q.ln().scale(1.0 / (alpha - 1.0))
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if other > self {
            other
        } else {
            self
        }
    }
}

/// Upper addition: `+∞` absorbs everything, including `−∞`.
impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::PosInf, _) | (_, ExtReal::PosInf) => ExtReal::PosInf,
            (ExtReal::NegInf, _) | (_, ExtReal::NegInf) => ExtReal::NegInf,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::from_f64(x)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::PosInf => f.write_str("inf"),
            ExtReal::Finite(x) => write!(f, "{x}"),
        }
    }
}

/// Positive functional on `⊕_k M_{d_k}`, stored as one density per block.
#[derive(Debug, Clone, PartialEq)]
pub struct FdState {
    blocks: Vec<HermMatrix>,
}

impl FdState {
    pub fn new(blocks: Vec<HermMatrix>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidArgument("a state needs at least one block".into()));
        }
        for b in &blocks {
            let sp = b.spectrum()?;
            if sp.min() < -STATE_PSD_TOL * sp.spectral_radius().max(1.0) {
                return Err(Error::NegativeSpectrum { min_eigenvalue: sp.min() });
            }
        }
        Ok(Self { blocks })
    }

    /// Single-block functional on `M_d`.
    pub fn from_density(density: HermMatrix) -> Result<Self> {
        Self::new(vec![density])
    }

    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        Self::from_density(HermMatrix::diagonal(probabilities))
    }

    pub fn blocks(&self) -> &[HermMatrix] {
        &self.blocks
    }

    /// Block dimensions `(d_1, …, d_m)`.
    pub fn algebra(&self) -> Vec<usize> {
        self.blocks.iter().map(HermMatrix::dim).collect()
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(HermMatrix::dim).sum()
    }

    /// Total mass `ρ(1)`.
    pub fn weight(&self) -> f64 {
        self.blocks.iter().map(HermMatrix::trace).sum()
    }

    pub fn is_state(&self) -> bool {
        (self.weight() - 1.0).abs() <= 1e-10
    }

    /// The block-diagonal density as one `d × d` matrix.
    pub fn density(&self) -> HermMatrix {
        if self.blocks.len() == 1 {
            self.blocks[0].clone()
        } else {
            direct_sum(&self.blocks)
        }
    }

    pub fn scale(&self, c: f64) -> FdState {
        FdState { blocks: self.blocks.iter().map(|b| b.scale(c)).collect() }
    }

    /// Tensor product; blocks of the product algebra are all pairwise products.
    pub fn tensor(&self, other: &FdState) -> FdState {
        let blocks = self
            .blocks
            .iter()
            .flat_map(|a| other.blocks.iter().map(move |b| tensor(a, b)))
            .collect();
        FdState { blocks }
    }
}

pub(crate) fn check_same_algebra(rho: &FdState, sigma: &FdState) -> Result<()> {
    let (a, b) = (rho.algebra(), sigma.algebra());
    if a == b {
        Ok(())
    } else {
        Err(Error::AlgebraMismatch { left: a, right: b })
    }
}

fn check_sandwiched_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.5 && alpha != 1.0 {
        Ok(())
    } else {
        Err(Error::BadAlpha(alpha))
    }
}

fn check_standard_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 && alpha != 1.0 {
        Ok(())
    } else {
        Err(Error::BadAlpha(alpha))
    }
}

/// `s(ρ) ≤ s(σ)` for single blocks.
pub fn support_contained(rho: &HermMatrix, sigma: &HermMatrix) -> Result<bool> {
    let p_rho = rho.support_projection(crate::linalg::SUPPORT_TOL)?;
    let p_sigma = sigma.support_projection(crate::linalg::SUPPORT_TOL)?;
    loewner_leq(p_rho.matrix(), p_sigma.matrix(), SUPPORT_CONTAINMENT_TOL)
}

/// `s(ρ) ≤ s(σ)` blockwise.
pub fn support_leq(rho: &FdState, sigma: &FdState) -> Result<bool> {
    check_same_algebra(rho, sigma)?;
    for (r, s) in rho.blocks.iter().zip(&sigma.blocks) {
        if !support_contained(r, s)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `log Σ exp(x_i)` over finite entries; `−∞` for an empty sum.
pub(crate) fn log_sum_exp(terms: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = terms.into_iter().filter(|x| *x > f64::NEG_INFINITY).collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn ext_log_sum_exp(terms: impl IntoIterator<Item = ExtReal>) -> ExtReal {
    let mut finite = Vec::new();
    for t in terms {
        match t {
            ExtReal::PosInf => return ExtReal::PosInf,
            ExtReal::NegInf => {}
            ExtReal::Finite(x) => finite.push(x),
        }
    }
    ExtReal::from_f64(log_sum_exp(finite))
}

/// Positive eigenvalues of a PSD operator above a relative cutoff.
pub(crate) fn positive_spectrum(a: &HermMatrix) -> Result<Vec<f64>> {
    let sp = a.spectrum()?;
    let cutoff = SANDWICH_CUTOFF * sp.max().max(0.0);
    Ok(sp.values.iter().copied().filter(|&v| v > cutoff && v > 0.0).collect())
}

/// `σ^{(1−α)/2α} ρ σ^{(1−α)/2α}` with pseudo-powers on `s(σ)`.
pub(crate) fn sandwiched_operator(rho: &HermMatrix, sigma: &HermMatrix, alpha: f64) -> Result<HermMatrix> {
    let s = sigma.power((1.0 - alpha) / (2.0 * alpha))?;
    s.sandwich(rho)
}

fn log_sandwiched_q_block(rho: &HermMatrix, sigma: &HermMatrix, alpha: f64) -> Result<ExtReal> {
    if alpha > 1.0 && !support_contained(rho, sigma)? {
        return Ok(ExtReal::PosInf);
    }
    let a = sandwiched_operator(rho, sigma, alpha)?;
    let spectrum = positive_spectrum(&a)?;
    Ok(ExtReal::from_f64(log_sum_exp(spectrum.iter().map(|l| alpha * l.ln()))))
}

/// `log Q*_α(ρ‖σ)`, evaluated in the log domain so that very large `α` stays finite.
pub fn log_sandwiched_q(rho: &FdState, sigma: &FdState, alpha: f64) -> Result<ExtReal> {
    check_sandwiched_alpha(alpha)?;
    check_same_algebra(rho, sigma)?;
    let mut terms = Vec::with_capacity(rho.blocks.len());
    for (r, s) in rho.blocks.iter().zip(&sigma.blocks) {
        terms.push(log_sandwiched_q_block(r, s, alpha)?);
    }
    Ok(ext_log_sum_exp(terms))
}

/// `Q*_α(ρ‖σ) = Tr(σ^{(1−α)/2α} ρ σ^{(1−α)/2α})^α`, or `+∞` when `α > 1` and
/// `s(ρ) ≰ s(σ)`.
pub fn sandwiched_q(rho: &FdState, sigma: &FdState, alpha: f64) -> Result<ExtReal> {
    Ok(log_sandwiched_q(rho, sigma, alpha)?.exp())
}

/// `D*_α(ρ‖σ) = log Q*_α / (α − 1)` (no normalization by `ρ(1)`).
pub fn sandwiched_d(rho: &FdState, sigma: &FdState, alpha: f64) -> Result<ExtReal> {
    Ok(log_sandwiched_q(rho, sigma, alpha)?.scale(1.0 / (alpha - 1.0)))
}

fn standard_q_block(rho: &HermMatrix, sigma: &HermMatrix, alpha: f64) -> Result<ExtReal> {
    if alpha > 1.0 && !support_contained(rho, sigma)? {
        return Ok(ExtReal::PosInf);
    }
    let ra = rho.power(alpha)?;
    let sb = sigma.power(1.0 - alpha)?;
    Ok(ExtReal::Finite(ra.trace_product(&sb).max(0.0)))
}

/// Petz-type `Q_α(ρ‖σ) = Tr ρ^α σ^{1−α}` with pseudo-powers.
pub fn standard_q(rho: &FdState, sigma: &FdState, alpha: f64) -> Result<ExtReal> {
    check_standard_alpha(alpha)?;
    check_same_algebra(rho, sigma)?;
    let mut total = ExtReal::ZERO;
    for (r, s) in rho.blocks.iter().zip(&sigma.blocks) {
        total = total + standard_q_block(r, s, alpha)?;
    }
    Ok(total)
}

/// Petz-type Rényi divergence `D_α(ρ‖σ)`, `α ∈ [0, ∞) \ {1}`.
pub fn standard_d(rho: &FdState, sigma: &FdState, alpha: f64) -> Result<ExtReal> {
    Ok(ExtReal::renyi_from_q(standard_q(rho, sigma, alpha)?, alpha))
}

/// Umegaki relative entropy `Tr ρ(log ρ − log σ)`, `+∞` unless `s(ρ) ≤ s(σ)`.
pub fn relative_entropy(rho: &FdState, sigma: &FdState) -> Result<ExtReal> {
    check_same_algebra(rho, sigma)?;
    let mut total = 0.0;
    for (r, s) in rho.blocks.iter().zip(&sigma.blocks) {
        if !support_contained(r, s)? {
            return Ok(ExtReal::PosInf);
        }
        let entropy_term: f64 = positive_spectrum(r)?.iter().map(|l| l * l.ln()).sum();
        let log_sigma = s.fn_on_support(f64::ln, crate::linalg::SUPPORT_TOL)?;
        total += entropy_term - r.trace_product(&log_sigma);
    }
    Ok(ExtReal::Finite(total))
}

/// Max-relative entropy `log min{Φ : ρ ≤ Φσ}`.
pub fn dmax(rho: &FdState, sigma: &FdState) -> Result<ExtReal> {
    check_same_algebra(rho, sigma)?;
    let mut best = ExtReal::NegInf;
    for (r, s) in rho.blocks.iter().zip(&sigma.blocks) {
        if !support_contained(r, s)? {
            return Ok(ExtReal::PosInf);
        }
        let b = s.power(-0.5)?.sandwich(r)?;
        let top = b.max_eigenvalue()?;
        if top > 0.0 {
            best = best.max(ExtReal::Finite(top.ln()));
        }
    }
    Ok(best)
}

/// Fidelity `Tr (σ^{1/2} ρ σ^{1/2})^{1/2}`.
pub fn fidelity(rho: &FdState, sigma: &FdState) -> Result<f64> {
    check_same_algebra(rho, sigma)?;
    let mut total = 0.0;
    for (r, s) in rho.blocks.iter().zip(&sigma.blocks) {
        let a = s.power(0.5)?.sandwich(r)?;
        total += positive_spectrum(&a)?.iter().map(|l| l.sqrt()).sum::<f64>();
    }
    Ok(total)
}

/// Commutation surrogate `‖[ρ, σ]‖ ≤ 1e-10 ‖ρ‖ ‖σ‖` (Frobenius norms).
pub fn commute(rho: &FdState, sigma: &FdState) -> Result<bool> {
    check_same_algebra(rho, sigma)?;
    for (r, s) in rho.blocks.iter().zip(&sigma.blocks) {
        if r.commutator_norm(s)? > 1e-10 * r.norm() * s.norm() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Classical `Σ p_i^α q_i^{1−α}` with the usual conventions: outcomes with
/// `p_i = 0` contribute nothing, and `p_i > 0 = q_i` forces `+∞` for `α > 1`.
/// Entries below `1e-15` times the total mass count as zero.
pub fn classical_q(p: &[f64], q: &[f64], alpha: f64) -> Result<ExtReal> {
    check_standard_alpha(alpha)?;
    if p.len() != q.len() {
        return Err(Error::DimMismatch { left: p.len(), right: q.len() });
    }
    let zp = 1e-15 * p.iter().map(|x| x.abs()).sum::<f64>();
    let zq = 1e-15 * q.iter().map(|x| x.abs()).sum::<f64>();
    let mut logs = Vec::with_capacity(p.len());
    for (&pi, &qi) in p.iter().zip(q) {
        if pi <= zp {
            continue;
        }
        if qi <= zq {
            if alpha > 1.0 {
                return Ok(ExtReal::PosInf);
            }
            continue;
        }
        logs.push(alpha * pi.ln() + (1.0 - alpha) * qi.ln());
    }
    Ok(ExtReal::from_f64(log_sum_exp(logs)).exp())
}

/// Classical Rényi divergence `(1/(α−1)) log Σ p^α q^{1−α}`.
pub fn classical_d(p: &[f64], q: &[f64], alpha: f64) -> Result<ExtReal> {
    Ok(ExtReal::renyi_from_q(classical_q(p, q, alpha)?, alpha))
}
