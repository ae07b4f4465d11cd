//! Variational formulas for `Q*_α`.
//!
//! For `α > 1`,
//! `Q*_α(ρ‖σ) = sup_{x ≥ 0} α ρ(x) − (α−1) Tr(σ^{(α−1)/2α} x σ^{(α−1)/2α})^{α/(α−1)}`,
//! and for `1/2 ≤ α < 1`,
//! `Q*_α(ρ‖σ) = inf_{x > 0} α ρ(x) + (1−α) Tr(σ^{(1−α)/2α} x^{−1} σ^{(1−α)/2α})^{α/(1−α)}`.
//!
//! With `A = σ^{(1−α)/2α} ρ σ^{(1−α)/2α}`, the point `x* = σ^{(1−α)/2α} A^{α−1} σ^{(1−α)/2α}`
//! makes both terms collapse to `Tr A^α`, so it attains the bound.

use faer::Mat;
use rand::Rng;

use crate::divergences::{check_same_algebra, sandwiched_operator, support_leq, ExtReal, FdState};
use crate::error::{Error, Result};
use crate::linalg::{c64, HermMatrix, SUPPORT_TOL};
use crate::optim::{herm_from_params, herm_grad_to_params, herm_param_count, lbfgs, spectral_gradient, LbfgsOptions};
use crate::random::{random_hermitian, rng_from_seed};

/// Smallest eigenvalue a variational point must exceed when `α < 1`.
pub const PD_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct VariationalResult {
    pub value: ExtReal,
    pub optimizer: HermMatrix,
    pub iterations: usize,
    pub converged: bool,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.5 && alpha != 1.0 {
        Ok(())
    } else {
        Err(Error::BadAlpha(alpha))
    }
}

/// `Tr B^γ` for `B` positive by construction; rounding-level negative
/// eigenvalues are clipped.
fn psd_trace_power(b: &HermMatrix, gamma: f64) -> Result<f64> {
    Ok(b.eigenvalues()?.iter().map(|&t| t.max(0.0).powf(gamma)).sum())
}

/// Objective of the variational formula at `x` (a `d × d` matrix on the
/// ambient space of the block-diagonal densities).
pub fn objective(rho: &FdState, sigma: &FdState, alpha: f64, x: &HermMatrix) -> Result<f64> {
    check_alpha(alpha)?;
    check_same_algebra(rho, sigma)?;
    let (r, s) = (rho.density(), sigma.density());
    if x.dim() != r.dim() {
        return Err(Error::DimMismatch { left: x.dim(), right: r.dim() });
    }
    if alpha > 1.0 {
        let min = x.min_eigenvalue()?;
        if min < -1e-10 * x.max_abs().max(1.0) {
            return Err(Error::NegativeSpectrum { min_eigenvalue: min });
        }
        let sq = s.power((alpha - 1.0) / (2.0 * alpha))?;
        let b = sq.sandwich(x)?;
        let penalty = psd_trace_power(&b, alpha / (alpha - 1.0))?;
        Ok(alpha * r.trace_product(x) - (alpha - 1.0) * penalty)
    } else {
        let min = x.min_eigenvalue()?;
        if min <= PD_THRESHOLD {
            return Err(Error::NotPositiveDefinite(min));
        }
        let x_inv = x.map_spectrum(|t| 1.0 / t)?;
        let sp = s.power((1.0 - alpha) / (2.0 * alpha))?;
        let c = sp.sandwich(&x_inv)?;
        let reward = psd_trace_power(&c, alpha / (1.0 - alpha))?;
        Ok(alpha * r.trace_product_spectral(x)? + (1.0 - alpha) * reward)
    }
}

/// The optimizer `x* = σ^{(1−α)/2α} A^{α−1} σ^{(1−α)/2α}`.
///
/// For `α < 1` the infimum is only approached when `A` is singular, and `A^{α−1}`
/// is replaced by `(A₊ + ε)^{α−1}` where `A₊` drops eigenvalues below the
/// support cutoff. Each kernel direction `a` of `A` costs about
/// `(1−α)ε^α + α ε^{α−1} η` with `η = ⟨σ^p a|ρ|σ^p a⟩` the rounding-level
/// weight the stored `ρ` puts there; `ε = α η_max/(1−α)` balances the two.
/// A multiple of `1 − s(σ)` is added so that `x*` is invertible.
pub fn closed_form_optimizer(rho: &FdState, sigma: &FdState, alpha: f64) -> Result<VariationalResult> {
    check_alpha(alpha)?;
    check_same_algebra(rho, sigma)?;
    if alpha > 1.0 && !support_leq(rho, sigma)? {
        return Err(Error::SupportViolation);
    }
    let (r, s) = (rho.density(), sigma.density());
    let d = r.dim();
    let sp = s.power((1.0 - alpha) / (2.0 * alpha))?;
    let a = sandwiched_operator(&r, &s, alpha)?;
    let x = if alpha > 1.0 {
        sp.sandwich(&a.power(alpha - 1.0)?)?
    } else {
        let spec = a.spectrum()?;
        let top = spec.max().max(f64::MIN_POSITIVE);
        let cutoff = SUPPORT_TOL * top;
        let mut eta_max = 0.0f64;
        for (i, &v) in spec.values.iter().enumerate() {
            if v <= cutoff {
                let w = sp.as_mat() * spec.vectors.col(i);
                let rw = r.as_mat() * &w;
                let eta: f64 = (0..d).map(|k| (w[k].conj() * rw[k]).re).sum();
                eta_max = eta_max.max(eta.abs());
            }
        }
        let eps = (alpha / (1.0 - alpha) * eta_max).max(1e-30 * top);
        let powered: Vec<f64> = spec
            .values
            .iter()
            .map(|&v| (if v > cutoff { v } else { 0.0 } + eps).powf((alpha - 1.0) / 2.0))
            .collect();
        let half = HermMatrix::from_spectrum(powered, spec.vectors.clone())?;
        let main = sp.as_mat() * half.as_mat();
        let kernel = s.support_projection(SUPPORT_TOL)?.complement();
        if kernel.rank() == 0 {
            HermMatrix::from_factor(main.as_ref())?
        } else {
            // On ker σ only ρ(x) sees x. If ρ lives inside s(σ) a well-scaled weight
            // keeps x* well conditioned; otherwise the weight has to be small.
            let top = main.norm_l2().powi(2);
            let weight = if r.trace_product(kernel.matrix()) <= 1e-12 * r.trace() {
                top
            } else {
                (10.0 * PD_THRESHOLD).max(1e-13 * top)
            };
            let k = kernel.range_basis()?;
            let basis = Mat::from_fn(d, k.ncols(), |i, j| k[(i, j)] * weight.sqrt());
            let mut factor = Mat::<c64>::zeros(d, d + basis.ncols());
            factor.as_mut().submatrix_mut(0, 0, d, d).copy_from(&main);
            factor.as_mut().submatrix_mut(0, d, d, basis.ncols()).copy_from(&basis);
            HermMatrix::from_factor(factor.as_ref())?
        }
    };
    let value = objective(rho, sigma, alpha, &x)?;
    Ok(VariationalResult { value: ExtReal::Finite(value), optimizer: x, iterations: 0, converged: true })
}

/// Objective and its gradient with respect to `H`, where `x = exp(H)`.
fn objective_in_log_coordinates(
    r: &HermMatrix,
    s_pow: &HermMatrix,
    alpha: f64,
    h: &HermMatrix,
) -> Result<(f64, HermMatrix)> {
    let x = h.map_spectrum(f64::exp)?;
    let (value, grad_x) = if alpha > 1.0 {
        let b = s_pow.sandwich(&x)?;
        let sp = b.spectrum()?;
        let gamma = alpha / (alpha - 1.0);
        let penalty: f64 = sp.values.iter().map(|&t| t.max(0.0).powf(gamma)).sum();
        let b_pow = b.map_spectrum(|t| t.max(0.0).powf(1.0 / (alpha - 1.0)))?;
        let grad = r.sub(&s_pow.sandwich(&b_pow)?)?.scale(alpha);
        (alpha * r.trace_product(&x) - (alpha - 1.0) * penalty, grad)
    } else {
        let x_inv = h.map_spectrum(|t| (-t).exp())?;
        let c = s_pow.sandwich(&x_inv)?;
        let beta = alpha / (1.0 - alpha);
        let reward: f64 = c.spectrum()?.values.iter().map(|&t| t.max(0.0).powf(beta)).sum();
        let c_pow = c.map_spectrum(|t| t.max(0.0).powf(beta - 1.0))?;
        let inner = x_inv.sandwich(&s_pow.sandwich(&c_pow)?)?;
        let grad = r.sub(&inner)?.scale(alpha);
        (alpha * r.trace_product(&x) + (1.0 - alpha) * reward, grad)
    };
    let grad_h = spectral_gradient(h, &grad_x, f64::exp, f64::exp)?;
    Ok((value, grad_h))
}

/// Independent numerical solution of the variational problem: L-BFGS over
/// Hermitian `H` with `x = exp(H)`, started near `H = 0` from a seeded
/// perturbation. Ascends for `α > 1`, descends for `α < 1`.
pub fn iterative_solve(
    rho: &FdState,
    sigma: &FdState,
    alpha: f64,
    max_iters: usize,
    seed: u64,
) -> Result<VariationalResult> {
    check_alpha(alpha)?;
    check_same_algebra(rho, sigma)?;
    let (r, s) = (rho.density(), sigma.density());
    let d = r.dim();
    let s_pow = if alpha > 1.0 {
        s.power((alpha - 1.0) / (2.0 * alpha))?
    } else {
        s.power((1.0 - alpha) / (2.0 * alpha))?
    };
    let sign = if alpha > 1.0 { -1.0 } else { 1.0 };

    let mut rng = rng_from_seed(seed);
    let start = random_hermitian(d, &mut rng).scale(0.01 * rng.random::<f64>());
    let x0 = crate::optim::herm_to_params(&start);
    debug_assert_eq!(x0.len(), herm_param_count(d));

    let opts = LbfgsOptions { max_iters, ..LbfgsOptions::default() };
    let outcome = lbfgs(
        |p| {
            let h = herm_from_params(p, d);
            match objective_in_log_coordinates(&r, &s_pow, alpha, &h) {
                Ok((v, g)) => Ok((sign * v, herm_grad_to_params(&g).into_iter().map(|t| sign * t).collect())),
                Err(e) if e.is_numerical() => Ok((f64::INFINITY, vec![0.0; p.len()])),
                Err(e) => Err(e),
            }
        },
        x0,
        opts,
    )?;
    let best = sign * outcome.value;
    if !outcome.converged {
        return Err(Error::NotConverged { best, iterations: outcome.iterations });
    }
    let optimizer = herm_from_params(&outcome.x, d).map_spectrum(f64::exp)?;
    Ok(VariationalResult {
        value: ExtReal::Finite(best),
        optimizer,
        iterations: outcome.iterations,
        converged: true,
    })
}
