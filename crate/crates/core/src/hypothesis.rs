//! Quantum hypothesis testing: Neyman–Pearson tests, minimal type I error
//! under an exponential type II budget, strong-converse exponents, the
//! Hoeffding anti-divergence and cutoff rates.

use faer::Mat;

use crate::algebra::{qubit_tensor_power, tensor_power_state};
use crate::divergences::{
    commute, dmax, log_sandwiched_q, log_sum_exp, relative_entropy, sandwiched_d, support_leq, ExtReal, FdState,
};
use crate::error::{Error, Result};
use crate::linalg::{c64, direct_sum, max_abs, HermMatrix};
use crate::optim::golden_max;

/// Bound on the number of type classes enumerated by the classical path.
pub const MAX_TYPE_CLASSES: usize = 5_000_000;

const BISECTION_ITERS: usize = 80;

/// A test `0 ≤ T ≤ 1`. The classical path never materializes `T`: it keeps
/// the likelihood-ratio rank of the threshold type class and the weight `γ`
/// put on it.
#[derive(Debug, Clone)]
pub enum TestOperator {
    Matrix(Vec<HermMatrix>),
    Threshold { index: usize, gamma: f64 },
}

impl TestOperator {
    pub fn matrix(&self) -> Option<HermMatrix> {
        match self {
            TestOperator::Matrix(blocks) => Some(direct_sum(blocks)),
            TestOperator::Threshold { .. } => None,
        }
    }

    /// Eigenvalues (or the randomization weight) lie in `[−1e-10, 1 + 1e-10]`.
    pub fn is_valid(&self) -> Result<bool> {
        match self {
            TestOperator::Matrix(blocks) => {
                for b in blocks {
                    if b.min_eigenvalue()? < -1e-10 || b.max_eigenvalue()? > 1.0 + 1e-10 {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            TestOperator::Threshold { gamma, .. } => Ok((-1e-10..=1.0 + 1e-10).contains(gamma)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPair {
    pub type1: f64,
    pub type2: f64,
}

/// Blockwise `(projection onto {a > tol}, ρ(P), σ(P))` for `a = ρ − λσ`.
fn positive_part(rho: &FdState, sigma: &FdState, lambda: f64) -> Result<(Vec<HermMatrix>, f64, f64)> {
    let mut proj = Vec::with_capacity(rho.blocks().len());
    let (mut rp, mut sp) = (0.0, 0.0);
    for (r, s) in rho.blocks().iter().zip(sigma.blocks()) {
        let a = r.sub(&s.scale(lambda))?;
        let tol = 1e-13 * (r.max_abs() + lambda * s.max_abs());
        let p = a.map_spectrum(|x| if x > tol { 1.0 } else { 0.0 })?;
        rp += r.trace_product(&p);
        sp += s.trace_product(&p);
        proj.push(p);
    }
    Ok((proj, rp, sp))
}

/// The projection `{ρ − λσ > 0}` and its errors `(ρ(1 − T), σ(T))`.
pub fn neyman_pearson(rho: &FdState, sigma: &FdState, lambda: f64) -> Result<(TestOperator, ErrorPair)> {
    check_pair(rho, sigma)?;
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::InvalidArgument(format!("Lagrange multiplier must be >= 0, got {lambda}")));
    }
    let (proj, rp, sp) = positive_part(rho, sigma, lambda)?;
    let errors = ErrorPair { type1: (rho.weight() - rp).max(0.0), type2: sp.max(0.0) };
    Ok((TestOperator::Matrix(proj), errors))
}

fn check_pair(rho: &FdState, sigma: &FdState) -> Result<()> {
    let (a, b) = (rho.algebra(), sigma.algebra());
    if a != b {
        return Err(Error::AlgebraMismatch { left: a, right: b });
    }
    Ok(())
}

/// Optimal randomized test for `min{ρ(1 − T) : σ(T) ≤ e^{log_budget}}`.
#[derive(Debug, Clone)]
pub struct OptimalTest {
    /// `ln ρ(T)`, the log success probability.
    pub log_success: f64,
    pub type2: f64,
    pub test: TestOperator,
}

/// Bisection on the Lagrange multiplier, then a convex combination of the two
/// bracketing Neyman–Pearson projections to spend the budget exactly.
pub fn optimal_test(rho: &FdState, sigma: &FdState, log_budget: f64) -> Result<OptimalTest> {
    check_pair(rho, sigma)?;
    let budget = log_budget.exp();
    let total_sigma = sigma.weight();
    if budget >= total_sigma {
        let ones = rho.blocks().iter().map(|b| HermMatrix::identity(b.dim())).collect();
        return Ok(OptimalTest {
            log_success: rho.weight().ln(),
            type2: total_sigma,
            test: TestOperator::Matrix(ones),
        });
    }
    let (p0, r0, s0) = positive_part(rho, sigma, 0.0)?;
    if s0 <= budget {
        return Ok(OptimalTest { log_success: r0.ln(), type2: s0, test: TestOperator::Matrix(p0) });
    }
    let hi = match dmax(rho, sigma)? {
        ExtReal::Finite(v) => v.exp() + 1.0,
        _ => 2.0 * rho.weight() / budget,
    };
    // σ(P_λ) is nonincreasing in λ; keep lo with σ(P_lo) > budget ≥ σ(P_hi).
    let (mut lo, mut hi) = (0.0, hi);
    let (mut lo_state, mut hi_state) = ((p0, r0, s0), positive_part(rho, sigma, hi)?);
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let st = positive_part(rho, sigma, mid)?;
        if st.2 > budget {
            lo = mid;
            lo_state = st;
        } else {
            hi = mid;
            hi_state = st;
        }
    }
    let (p_lo, r_lo, s_lo) = lo_state;
    let (p_hi, r_hi, s_hi) = hi_state;
    let gamma = if s_lo > s_hi { ((budget - s_hi) / (s_lo - s_hi)).clamp(0.0, 1.0) } else { 0.0 };
    let blocks = p_lo
        .iter()
        .zip(&p_hi)
        .map(|(a, b)| a.scale(gamma).add(&b.scale(1.0 - gamma)))
        .collect::<Result<Vec<_>>>()?;
    let success = gamma * r_lo + (1.0 - gamma) * r_hi;
    Ok(OptimalTest {
        log_success: success.ln(),
        type2: gamma * s_lo + (1.0 - gamma) * s_hi,
        test: TestOperator::Matrix(blocks),
    })
}

/// Joint eigenvalue lists `(p_i, q_i)` of a commuting pair.
pub fn joint_distribution(rho: &FdState, sigma: &FdState) -> Result<(Vec<f64>, Vec<f64>)> {
    if !commute(rho, sigma)? {
        return Err(Error::InvalidArgument("pair does not commute".into()));
    }
    let (mut p, mut q) = (Vec::new(), Vec::new());
    for (r, s) in rho.blocks().iter().zip(sigma.blocks()) {
        for space in s.eigenspaces(1e-10)? {
            let v = &space.basis;
            let compressed = HermMatrix::from_hermitian_unchecked(v.adjoint() * r.as_mat() * v);
            for &e in compressed.eigenvalues()? {
                p.push(e.max(0.0));
                q.push(space.value.max(0.0));
            }
        }
    }
    Ok((p, q))
}

/// Outcome classes with a common likelihood ratio, merged. Outcomes with
/// `p = 0` never enter an optimal test and are dropped.
fn ratio_classes(p: &[f64], q: &[f64]) -> Vec<(f64, f64)> {
    let zp = 1e-15 * p.iter().sum::<f64>();
    let zq = 1e-15 * q.iter().sum::<f64>();
    let mut items: Vec<(f64, f64, f64)> = p
        .iter()
        .zip(q)
        .filter(|(pi, _)| **pi > zp)
        .map(|(&pi, &qi)| {
            let qi = if qi > zq { qi } else { 0.0 };
            let lr = if qi > 0.0 { pi.ln() - qi.ln() } else { f64::INFINITY };
            (lr, pi, qi)
        })
        .collect();
    items.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut out: Vec<(f64, f64, f64)> = Vec::new();
    for it in items {
        match out.last_mut() {
            Some(last) if last.0 == it.0 || (last.0 - it.0).abs() <= 1e-12 * last.0.abs().max(1.0) => {
                last.1 += it.1;
                last.2 += it.2;
            }
            _ => out.push(it),
        }
    }
    out.into_iter().map(|(_, a, b)| (a, b)).collect()
}

fn for_each_composition(n: usize, parts: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(left: usize, idx: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if idx + 1 == buf.len() {
            buf[idx] = left;
            f(buf);
            return;
        }
        for c in 0..=left {
            buf[idx] = c;
            rec(left - c, idx + 1, buf, f);
        }
    }
    let mut buf = vec![0; parts];
    rec(n, 0, &mut buf, f);
}

fn ln_factorial(k: usize) -> f64 {
    libm::lgamma(k as f64 + 1.0)
}

/// `ln(e^a − e^b)` for `a ≥ b`.
fn log_diff_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if b >= a {
        return f64::NEG_INFINITY;
    }
    a + (-(b - a).exp()).ln_1p()
}

/// Classical optimal test over `n` i.i.d. draws, enumerated by type class.
pub fn classical_optimal_test(p: &[f64], q: &[f64], n: usize, log_budget: f64) -> Result<OptimalTest> {
    if p.len() != q.len() {
        return Err(Error::DimMismatch { left: p.len(), right: q.len() });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let classes = ratio_classes(p, q);
    if classes.is_empty() {
        return Ok(OptimalTest { log_success: f64::NEG_INFINITY, type2: 0.0, test: TestOperator::Threshold { index: 0, gamma: 0.0 } });
    }
    let k = classes.len();
    let count = (1..k).fold(1.0f64, |acc, i| acc * (n + i) as f64 / i as f64);
    if count > MAX_TYPE_CLASSES as f64 {
        return Err(Error::TooLarge(format!("{count:.3e} type classes")));
    }
    let lp: Vec<f64> = classes.iter().map(|c| c.0.ln()).collect();
    let lq: Vec<f64> = classes.iter().map(|c| if c.1 > 0.0 { c.1.ln() } else { f64::NEG_INFINITY }).collect();
    let lnf = ln_factorial(n);
    // (log ratio, log P(type), log Q(type))
    let mut types: Vec<(f64, f64, f64)> = Vec::with_capacity(count as usize);
    for_each_composition(n, k, &mut |c: &[usize]| {
        let mut log_mult = lnf;
        let (mut a, mut b) = (0.0, 0.0);
        for (i, &ci) in c.iter().enumerate() {
            if ci > 0 {
                log_mult -= ln_factorial(ci);
                a += ci as f64 * lp[i];
                b += ci as f64 * lq[i];
            }
        }
        let (lpt, lqt) = (log_mult + a, log_mult + b);
        let ratio = if lqt == f64::NEG_INFINITY { f64::INFINITY } else { lpt - lqt };
        types.push((ratio, lpt, lqt));
    });
    types.sort_by(|a, b| b.0.total_cmp(&a.0));

    let (mut cum_p, mut cum_q) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (idx, &(_, lpt, lqt)) in types.iter().enumerate() {
        let next_q = log_sum_exp([cum_q, lqt]);
        if next_q <= log_budget {
            cum_p = log_sum_exp([cum_p, lpt]);
            cum_q = next_q;
            continue;
        }
        let log_gamma = (log_diff_exp(log_budget, cum_q) - lqt).min(0.0);
        let log_success = log_sum_exp([cum_p, lpt + log_gamma]);
        return Ok(OptimalTest {
            log_success,
            type2: log_budget.exp(),
            test: TestOperator::Threshold { index: idx, gamma: log_gamma.exp() },
        });
    }
    Ok(OptimalTest {
        log_success: cum_p,
        type2: cum_q.exp(),
        test: TestOperator::Threshold { index: types.len(), gamma: 0.0 },
    })
}

/// `ln(1 − α*_{e^{−nr}})`: commuting pairs use type classes, qubits the
/// Schur–Weyl reduced tensor power, everything else the dense tensor power.
pub fn log_success(rho: &FdState, sigma: &FdState, n: usize, r: f64) -> Result<f64> {
    check_pair(rho, sigma)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let log_budget = -(n as f64) * r;
    if commute(rho, sigma)? {
        let (p, q) = joint_distribution(rho, sigma)?;
        return Ok(classical_optimal_test(&p, &q, n, log_budget)?.log_success);
    }
    let (rn, sn) = if rho.algebra() == [2] {
        (qubit_tensor_power(rho, n)?, qubit_tensor_power(sigma, n)?)
    } else {
        (tensor_power_state(rho, n)?, tensor_power_state(sigma, n)?)
    };
    Ok(optimal_test(&rn, &sn, log_budget)?.log_success)
}

/// `α*_{e^{−nr}} = min{ρ_n(1 − T) : σ_n(T) ≤ e^{−nr}}`.
pub fn min_type1(rho: &FdState, sigma: &FdState, n: usize, r: f64) -> Result<f64> {
    if r <= 0.0 && rho.is_state() && sigma.is_state() {
        return Ok(0.0);
    }
    let ls = log_success(rho, sigma, n, r)?;
    Ok((rho.weight().powi(n as i32) - ls.exp()).max(0.0))
}

/// `−(1/n) ln(1 − α*_{e^{−nr}})` for each `n`.
pub fn sce_sequence(rho: &FdState, sigma: &FdState, r: f64, n_list: &[usize]) -> Result<Vec<f64>> {
    n_list.iter().map(|&n| Ok(-log_success(rho, sigma, n, r)? / n as f64)).collect()
}

/// `ψ̃(u) = (1 − u) ln Q*_{1/(1−u)}` with the limits `ψ̃(0) = ln ρ(1)` and
/// `ψ̃(1) = D_max` (both `+∞` when `s(ρ) ≰ s(σ)`).
pub fn psi_tilde(rho: &FdState, sigma: &FdState, u: f64) -> Result<ExtReal> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::BadU(u));
    }
    check_pair(rho, sigma)?;
    if u == 0.0 {
        return Ok(if support_leq(rho, sigma)? { ExtReal::from_f64(rho.weight().ln()) } else { ExtReal::PosInf });
    }
    if u == 1.0 {
        return dmax(rho, sigma);
    }
    Ok(log_sandwiched_q(rho, sigma, 1.0 / (1.0 - u))?.scale(1.0 - u))
}

/// `H*_r = sup_{0<u<1} (u r − ψ̃(u))`, by golden section on the concave
/// objective with the endpoint limits included.
pub fn hoeffding_anti_divergence(rho: &FdState, sigma: &FdState, r: f64) -> Result<ExtReal> {
    check_pair(rho, sigma)?;
    if !support_leq(rho, sigma)? {
        return Ok(ExtReal::NegInf);
    }
    let mut failure = None;
    let (_, best) = golden_max(
        |u| match psi_tilde(rho, sigma, u) {
            Ok(ExtReal::Finite(v)) => u * r - v,
            Ok(ExtReal::PosInf) => f64::NEG_INFINITY,
            Ok(ExtReal::NegInf) => f64::INFINITY,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        0.0,
        1.0,
        1e-11,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(ExtReal::from_f64(best))
}

/// Generalized κ-cutoff rate `C_κ = D*_{1/(1−κ)}`.
pub fn cutoff_rate(rho: &FdState, sigma: &FdState, kappa: f64) -> Result<ExtReal> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::BadKappa(kappa));
    }
    let c = sandwiched_d(rho, sigma, 1.0 / (1.0 - kappa))?;
    if !c.is_finite() {
        return Err(Error::Infinite("cutoff rate"));
    }
    Ok(c)
}

/// Samples of `ψ(α) = ln Q*_α` on `{1 + 2^{−k}} ∪ {2, 3, …, α_max}`.
#[derive(Debug, Clone)]
pub struct PsiCurve {
    pub alphas: Vec<f64>,
    pub psi_values: Vec<ExtReal>,
    pub finite_up_to: Option<f64>,
}

pub fn psi_curve(rho: &FdState, sigma: &FdState, alpha_max: f64) -> Result<PsiCurve> {
    if alpha_max.is_nan() || alpha_max <= 1.0 {
        return Err(Error::BadAlpha(alpha_max));
    }
    let mut alphas: Vec<f64> = (1..=10).rev().map(|k| 1.0 + 0.5f64.powi(k)).collect();
    let mut a = 2.0;
    while a <= alpha_max {
        if a > 1.5 {
            alphas.push(a);
        }
        a += 1.0;
    }
    alphas.retain(|&x| x <= alpha_max);
    let psi_values = alphas.iter().map(|&a| log_sandwiched_q(rho, sigma, a)).collect::<Result<Vec<_>>>()?;
    let finite_up_to = alphas.iter().zip(&psi_values).filter(|(_, v)| v.is_finite()).map(|(a, _)| *a).next_back();
    Ok(PsiCurve { alphas, psi_values, finite_up_to })
}

impl PsiCurve {
    /// Smallest second divided difference over consecutive finite samples.
    pub fn min_curvature(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .alphas
            .iter()
            .zip(&self.psi_values)
            .filter_map(|(&a, v)| v.finite().map(|y| (a, y)))
            .collect();
        pts.windows(3)
            .map(|w| {
                let s1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                let s2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
                (s2 - s1) / (w[2].0 - w[0].0)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Conditions of the degenerate-pair characterization.
#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport {
    pub is_degenerate: bool,
    pub gamma: Option<f64>,
    /// `D = D_max`.
    pub cond_b: bool,
    /// `[ρ, σ] = 0` and `ρσ^{−1} = γ s(ρ)`.
    pub cond_c: bool,
    /// `[s(ρ), σ] = 0` and `ρ = γ σ s(ρ)`.
    pub cond_d: bool,
    /// `max_r |H*_r − (r − D)_+|` over `r ∈ {0, D/2, D, 2D, 2D + 1}` when degenerate.
    pub hoeffding_residual: Option<f64>,
}

impl DegeneracyReport {
    pub fn flags_agree(&self) -> bool {
        self.cond_b == self.cond_c && self.cond_c == self.cond_d
    }
}

pub fn degenerate_check(rho: &FdState, sigma: &FdState) -> Result<DegeneracyReport> {
    check_pair(rho, sigma)?;
    if !support_leq(rho, sigma)? {
        return Err(Error::SupportViolation);
    }
    let d = relative_entropy(rho, sigma)?.finite().ok_or(Error::Infinite("relative entropy"))?;
    let dm = dmax(rho, sigma)?.finite().ok_or(Error::Infinite("max-relative entropy"))?;
    let cond_b = (d - dm).abs() <= 1e-9;

    let r = rho.density();
    let s = sigma.density();
    let s_rho = r.support_projection(crate::linalg::SUPPORT_TOL)?;
    let sr = s_rho.matrix();

    let commutes = r.commutator_norm(&s)? <= 1e-10;
    let s_inv = s.fn_on_support(|x| 1.0 / x, crate::linalg::SUPPORT_TOL)?;
    let ratio: Mat<c64> = r.as_mat() * s_inv.as_mat();
    let rank = sr.trace();
    let gamma_c = ratio.diagonal().column_vector().iter().map(|z| z.re).sum::<f64>() / rank;
    let cond_c = commutes && max_abs((&ratio - sr.scale(gamma_c).as_mat()).as_ref()) <= 1e-9;

    let support_commutes = sr.commutator_norm(&s)? <= 1e-10;
    let gamma_d = r.trace() / s.trace_product(sr);
    let target: Mat<c64> = s.scale(gamma_d).as_mat() * sr.as_mat();
    let cond_d = support_commutes && max_abs((r.as_mat() - &target).as_ref()) <= 1e-9;

    let is_degenerate = cond_b && cond_c && cond_d;
    let hoeffding_residual = if is_degenerate {
        let mut worst: f64 = 0.0;
        for rate in [0.0, d / 2.0, d, 2.0 * d, 2.0 * d + 1.0] {
            let h = hoeffding_anti_divergence(rho, sigma, rate)?.to_f64();
            worst = worst.max((h - (rate - d).max(0.0)).abs());
        }
        Some(worst)
    } else {
        None
    };
    Ok(DegeneracyReport {
        is_degenerate,
        gamma: is_degenerate.then_some(gamma_d),
        cond_b,
        cond_c,
        cond_d,
        hoeffding_residual,
    })
}

/// One row of the `(n, r)` experiment grid.
#[derive(Debug, Clone)]
pub struct ExperimentRow {
    pub n: usize,
    pub r: f64,
    pub alpha_star: f64,
    pub sce_value: f64,
    pub hoeffding_value: ExtReal,
}

/// Rows sorted by `(r, n)`.
pub fn experiment_grid(rho: &FdState, sigma: &FdState, r_list: &[f64], n_list: &[usize]) -> Result<Vec<ExperimentRow>> {
    let mut rs = r_list.to_vec();
    rs.sort_by(f64::total_cmp);
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    let mut rows = Vec::with_capacity(rs.len() * ns.len());
    for &r in &rs {
        let h = hoeffding_anti_divergence(rho, sigma, r)?;
        for &n in &ns {
            let ls = log_success(rho, sigma, n, r)?;
            rows.push(ExperimentRow {
                n,
                r,
                alpha_star: (rho.weight().powi(n as i32) - ls.exp()).max(0.0),
                sce_value: -ls / n as f64,
                hoeffding_value: h,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{commuting_pair, noncommuting_pair};
    use crate::random::{random_hermitian, random_state, rng_from_seed};
    use approx::assert_relative_eq;

    /// `max_λ ρ(1) − Σ_i (P_i − λQ_i)_+ − λ b` evaluated at every breakpoint of
    /// the piecewise-linear dual, over all `n`-sequences.
    fn lp_dual_min_type1(p: &[f64], q: &[f64], n: usize, r: f64) -> f64 {
        let d = p.len();
        let mut seq_p = vec![1.0];
        let mut seq_q = vec![1.0];
        for _ in 0..n {
            seq_p = seq_p.iter().flat_map(|a| p.iter().map(move |x| a * x)).collect();
            seq_q = seq_q.iter().flat_map(|a| q.iter().map(move |x| a * x)).collect();
        }
        assert_eq!(seq_p.len(), d.pow(n as u32));
        let b = (-(n as f64) * r).exp();
        let total: f64 = seq_p.iter().sum();
        let mut lambdas = vec![0.0];
        lambdas.extend(seq_p.iter().zip(&seq_q).filter(|(_, q)| **q > 0.0).map(|(p, q)| p / q));
        lambdas
            .iter()
            .map(|&l| total - seq_p.iter().zip(&seq_q).map(|(p, q)| (p - l * q).max(0.0)).sum::<f64>() - l * b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn neyman_pearson_examples() {
        let (rho, sigma) = commuting_pair();
        let (t, e) = neyman_pearson(&rho, &sigma, 1.0).unwrap();
        assert!(max_abs((t.matrix().unwrap().as_mat() - HermMatrix::diagonal(&[1.0, 0.0]).as_mat()).as_ref()) < 1e-15);
        assert_relative_eq!(e.type1, 0.5, epsilon = 1e-15);
        assert_relative_eq!(e.type2, 1.0 / 3.0, epsilon = 1e-15);

        let (plus, sig) = noncommuting_pair();
        let (t, e) = neyman_pearson(&plus, &sig, 0.0).unwrap();
        assert!(max_abs((t.matrix().unwrap().as_mat() - plus.density().as_mat()).as_ref()) < 1e-12);
        assert!(e.type1.abs() < 1e-12);

        let big = dmax(&plus, &sig).unwrap().to_f64().exp() * 1.01;
        let (t, e) = neyman_pearson(&plus, &sig, big).unwrap();
        assert!(t.matrix().unwrap().max_abs() < 1e-15);
        assert_relative_eq!(e.type1, 1.0, epsilon = 1e-12);
        assert_eq!(e.type2, 0.0);
        assert!(neyman_pearson(&plus, &sig, -1.0).is_err());
    }

    #[test]
    fn min_type1_examples() {
        let (rho, sigma) = commuting_pair();
        assert_eq!(min_type1(&rho, &sigma, 4, -0.1).unwrap(), 0.0);
        assert_eq!(min_type1(&rho, &sigma, 4, 0.0).unwrap(), 0.0);
        // budget far below the smallest σ_n mass: only a sliver of one outcome fits
        let sliver = min_type1(&rho, &sigma, 3, 5.0).unwrap();
        assert!(sliver < 1.0 && 1.0 - sliver < 1e-5);

        let (p, q) = joint_distribution(&rho, &sigma).unwrap();
        for r in [0.05, 0.2, 0.5, 1.0] {
            let got = min_type1(&rho, &sigma, 3, r).unwrap();
            assert!((got - lp_dual_min_type1(&p, &q, 3, r)).abs() < 1e-13, "r = {r}");
        }
    }

    #[test]
    fn quantum_path_agrees_with_classical_on_diagonal_pairs() {
        let p = [0.2, 0.5, 0.3];
        let q = [0.4, 0.1, 0.5];
        let rho = FdState::diagonal(&p).unwrap();
        let sigma = FdState::diagonal(&q).unwrap();
        for n in 1..=3 {
            for r in [0.1, 0.4, 0.9] {
                let dense = optimal_test(
                    &tensor_power_state(&rho, n).unwrap(),
                    &tensor_power_state(&sigma, n).unwrap(),
                    -(n as f64) * r,
                )
                .unwrap();
                let classical = classical_optimal_test(&p, &q, n, -(n as f64) * r).unwrap();
                assert!((dense.log_success.exp() - classical.log_success.exp()).abs() < 1e-12);
                assert!((dense.log_success.exp() - (1.0 - lp_dual_min_type1(&p, &q, n, r))).abs() < 1e-12);
                assert!(dense.test.is_valid().unwrap());
            }
        }
    }

    #[test]
    fn qubit_reduction_matches_dense_tests() {
        let (plus, sigma) = noncommuting_pair();
        for n in 1..=5 {
            let r = 0.5;
            let reduced = optimal_test(
                &qubit_tensor_power(&plus, n).unwrap(),
                &qubit_tensor_power(&sigma, n).unwrap(),
                -(n as f64) * r,
            )
            .unwrap();
            let dense = optimal_test(
                &tensor_power_state(&plus, n).unwrap(),
                &tensor_power_state(&sigma, n).unwrap(),
                -(n as f64) * r,
            )
            .unwrap();
            assert!((reduced.log_success - dense.log_success).abs() < 1e-10);
            let budget = (-(n as f64) * r).exp();
            assert!(dense.type2 <= budget + 1e-12);
            if dense.log_success < -1e-12 {
                assert!((dense.type2 - budget).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn psi_tilde_examples() {
        let (rho, sigma) = commuting_pair();
        assert_relative_eq!(psi_tilde(&rho, &sigma, 0.5).unwrap().to_f64(), 0.5 * 1.125f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(psi_tilde(&rho, &sigma, 0.5).unwrap().to_f64(), 0.0588915, epsilon = 1e-7);
        assert_eq!(psi_tilde(&rho, &sigma, 0.0).unwrap().to_f64(), 0.0);
        assert!(psi_tilde(&rho, &sigma, 1e-9).unwrap().to_f64().abs() < 1e-8);
        assert_relative_eq!(psi_tilde(&rho, &sigma, 1.0).unwrap().to_f64(), 1.5f64.ln(), max_relative = 1e-12);
        assert!((psi_tilde(&rho, &sigma, 1.0 - 1e-9).unwrap().to_f64() - 1.5f64.ln()).abs() < 1e-6);
        assert!(matches!(psi_tilde(&rho, &sigma, 1.5), Err(Error::BadU(_))));
        assert!(matches!(psi_tilde(&rho, &sigma, -0.1), Err(Error::BadU(_))));

        let pure = FdState::diagonal(&[1.0, 0.0]).unwrap();
        let other = FdState::diagonal(&[0.0, 1.0]).unwrap();
        assert_eq!(psi_tilde(&pure, &other, 0.3).unwrap(), ExtReal::PosInf);
        assert_eq!(hoeffding_anti_divergence(&pure, &other, 0.3).unwrap(), ExtReal::NegInf);
    }

    #[test]
    fn hoeffding_examples() {
        let (rho, sigma) = commuting_pair();
        for r in [0.0, 0.3, 1.7] {
            assert!((hoeffding_anti_divergence(&rho, &rho, r).unwrap().to_f64() - r).abs() < 1e-12);
        }
        assert!(hoeffding_anti_divergence(&rho, &rho, -0.4).unwrap().to_f64().abs() < 1e-15);

        let d = relative_entropy(&rho, &sigma).unwrap().to_f64();
        assert!(hoeffding_anti_divergence(&rho, &sigma, d).unwrap().to_f64().abs() < 1e-6);

        // 10^5-point grid oracle with the scalar formula
        let r = 0.3;
        let grid = (1..100_000)
            .map(|i| {
                let u = i as f64 / 100_000.0;
                let a = 1.0 / (1.0 - u);
                let q = 0.5f64.powf(a) * ((1.0 / 3.0f64).powf(1.0 - a) + (2.0 / 3.0f64).powf(1.0 - a));
                u * r - (1.0 - u) * q.ln()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let h = hoeffding_anti_divergence(&rho, &sigma, r).unwrap().to_f64();
        assert!(h > 0.0);
        assert!((h - grid).abs() < 1e-7);
    }

    #[test]
    fn cutoff_examples() {
        let (rho, sigma) = commuting_pair();
        assert_relative_eq!(cutoff_rate(&rho, &sigma, 0.5).unwrap().to_f64(), 0.117783, epsilon = 1e-6);
        assert!(cutoff_rate(&rho, &rho, 0.3).unwrap().to_f64().abs() < 1e-12);
        let (plus, sig) = noncommuting_pair();
        assert!((cutoff_rate(&plus, &sig, 0.5).unwrap().to_f64() - 0.7819).abs() < 1e-4);
        assert!(matches!(cutoff_rate(&rho, &sigma, 1.0), Err(Error::BadKappa(_))));
        assert!(matches!(cutoff_rate(&rho, &sigma, 0.0), Err(Error::BadKappa(_))));
        let pure = FdState::diagonal(&[1.0, 0.0]).unwrap();
        let other = FdState::diagonal(&[0.0, 1.0]).unwrap();
        assert!(matches!(cutoff_rate(&pure, &other, 0.5), Err(Error::Infinite(_))));

        // supporting line H*_r ≥ κ(r − C_κ), touching somewhere on the grid
        let c = cutoff_rate(&rho, &sigma, 0.5).unwrap().to_f64();
        let slack: Vec<f64> = (0..200)
            .map(|i| {
                let r = 0.8 * i as f64 / 199.0;
                hoeffding_anti_divergence(&rho, &sigma, r).unwrap().to_f64() - 0.5 * (r - c)
            })
            .collect();
        assert!(slack.iter().all(|s| *s >= -1e-9));
        assert!(slack.iter().copied().fold(f64::INFINITY, f64::min) <= 1e-4);
    }

    #[test]
    fn sce_examples() {
        let (rho, _) = commuting_pair();
        let seq = sce_sequence(&rho, &rho, -0.1, &[1, 5, 20]).unwrap();
        assert!(seq.iter().all(|v| v.abs() < 1e-15));

        let (rho, sigma) = commuting_pair();
        let h = hoeffding_anti_divergence(&rho, &sigma, 0.25).unwrap().to_f64();
        let seq = sce_sequence(&rho, &sigma, 0.25, &[256, 512, 1024, 2048]).unwrap();
        let gaps: Vec<f64> = seq.iter().map(|v| (v - h).abs()).collect();
        assert!(gaps[3] <= 0.02, "{gaps:?}");
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    }

    #[test]
    fn degenerate_examples() {
        let (rho, sigma) = commuting_pair();
        let same = degenerate_check(&sigma, &sigma).unwrap();
        assert!(same.is_degenerate && same.flags_agree());
        assert_relative_eq!(same.gamma.unwrap(), 1.0, epsilon = 1e-12);

        let e1 = FdState::diagonal(&[1.0, 0.0]).unwrap();
        let rep = degenerate_check(&e1, &sigma).unwrap();
        assert!(rep.is_degenerate && rep.flags_agree());
        assert_relative_eq!(rep.gamma.unwrap(), 3.0, max_relative = 1e-12);
        assert_relative_eq!(relative_entropy(&e1, &sigma).unwrap().to_f64(), 3f64.ln(), max_relative = 1e-12);
        assert!(rep.hoeffding_residual.unwrap() < 1e-8);

        let generic = degenerate_check(&rho, &sigma).unwrap();
        assert!(!generic.is_degenerate && generic.flags_agree());

        let e2 = FdState::diagonal(&[0.0, 1.0]).unwrap();
        assert!(matches!(degenerate_check(&e1, &e2), Err(Error::SupportViolation)));
    }

    #[test]
    fn psi_curve_is_convex() {
        let (plus, sigma) = noncommuting_pair();
        let curve = psi_curve(&plus, &sigma, 64.0).unwrap();
        assert_eq!(curve.finite_up_to, Some(64.0));
        assert!(curve.min_curvature() >= -1e-8);
        let e1 = FdState::diagonal(&[1.0, 0.0]).unwrap();
        let e2 = FdState::diagonal(&[0.0, 1.0]).unwrap();
        assert_eq!(psi_curve(&e1, &e2, 8.0).unwrap().finite_up_to, None);
    }

    #[test]
    fn experiment_rows_are_sorted() {
        let (rho, sigma) = commuting_pair();
        let rows = experiment_grid(&rho, &sigma, &[0.3, 0.25], &[64, 16]).unwrap();
        let keys: Vec<(f64, usize)> = rows.iter().map(|r| (r.r, r.n)).collect();
        assert_eq!(keys, vec![(0.25, 16), (0.25, 64), (0.3, 16), (0.3, 64)]);
        let direct = sce_sequence(&rho, &sigma, 0.25, &[16]).unwrap()[0];
        assert_eq!(rows[0].sce_value, direct);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn lagrangian_optimality(seed in any::<u64>(), lambda in 0.0f64..4.0) {
                let mut rng = rng_from_seed(seed);
                let rho = random_state(3, 3, &mut rng);
                let sigma = random_state(3, 2, &mut rng);
                let (t, e) = neyman_pearson(&rho, &sigma, lambda).unwrap();
                prop_assert!(t.is_valid().unwrap());
                let best = e.type1 + lambda * e.type2;
                for _ in 0..20 {
                    let h = random_hermitian(3, &mut rng);
                    let tp = h.map_spectrum(|x| 1.0 / (1.0 + (-x).exp())).unwrap();
                    let r = rho.density();
                    let s = sigma.density();
                    let val = (1.0 - r.trace_product(&tp)) + lambda * s.trace_product(&tp);
                    prop_assert!(val >= best - 1e-12);
                }
            }

            #[test]
            fn hoeffding_shape(seed in any::<u64>()) {
                let mut rng = rng_from_seed(seed);
                let rho = random_state(2, 2, &mut rng);
                let sigma = random_state(2, 2, &mut rng);
                let dm = dmax(&rho, &sigma).unwrap().to_f64();
                let rs: Vec<f64> = (0..25).map(|i| 2.0 * dm * i as f64 / 24.0).collect();
                let hs: Vec<f64> = rs.iter().map(|&r| hoeffding_anti_divergence(&rho, &sigma, r).unwrap().to_f64()).collect();
                for w in hs.windows(2) {
                    prop_assert!(w[1] >= w[0] - 1e-10);
                }
                for w in hs.windows(3) {
                    prop_assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-8);
                }
                let (lam, mu) = (0.7, 1.9);
                for &r in &rs[..5] {
                    let lhs = hoeffding_anti_divergence(&rho.scale(lam), &sigma.scale(mu), r).unwrap().to_f64();
                    let rhs = hoeffding_anti_divergence(&rho, &sigma, r + mu.ln()).unwrap().to_f64() - lam.ln();
                    prop_assert!((lhs - rhs).abs() < 1e-9, "{} vs {}", lhs, rhs);
                }
            }

            #[test]
            fn finite_n_exponent_bound(seed in any::<u64>(), r in 0.05f64..1.0) {
                let mut rng = rng_from_seed(seed);
                let rho = random_state(2, 2, &mut rng);
                let sigma = random_state(2, 2, &mut rng);
                for n in [1usize, 3, 6] {
                    let sce = sce_sequence(&rho, &sigma, r, &[n]).unwrap()[0];
                    for i in 1..20 {
                        let u = i as f64 / 20.0;
                        let psi = psi_tilde(&rho, &sigma, u).unwrap().to_f64();
                        prop_assert!(sce >= u * r - psi - 1e-6);
                    }
                }
            }

            #[test]
            fn min_type1_monotone_in_r(seed in any::<u64>()) {
                let mut rng = rng_from_seed(seed);
                let (rho, sigma, _, _) = crate::random::random_commuting_pair(3, &mut rng);
                let mut last = 0.0;
                for i in 0..10 {
                    let v = min_type1(&rho, &sigma, 6, 0.1 * i as f64).unwrap();
                    prop_assert!(v >= last - 1e-12);
                    last = v;
                }
            }

            #[test]
            fn exhaustive_oracle_on_small_instances(seed in any::<u64>(), d in 2usize..4, n in 1usize..4, r in 0.0f64..1.5) {
                let mut rng = rng_from_seed(seed);
                let p = crate::random::random_probability(d, &mut rng);
                let q = crate::random::random_probability(d, &mut rng);
                let got = classical_optimal_test(&p, &q, n, -(n as f64) * r).unwrap();
                let want = 1.0 - lp_dual_min_type1(&p, &q, n, r);
                prop_assert!((got.log_success.exp() - want).abs() < 1e-12);
            }
        }
    }
}
