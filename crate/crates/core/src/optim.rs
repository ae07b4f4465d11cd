//! Small smooth-optimization toolkit: L-BFGS, golden-section search,
//! monotone bisection, and Daleckii–Krein gradients of spectral functions.

use faer::Mat;

use crate::error::Result;
use crate::linalg::{c64, HermMatrix};

/// Outcome of an unconstrained minimization.
#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct LbfgsOptions {
    pub max_iters: usize,
    pub memory: usize,
    /// Stop once the objective changes by less than this on two consecutive steps.
    pub ftol: f64,
    /// Stop once the gradient's sup-norm drops below this.
    pub gtol: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self { max_iters: 2000, memory: 10, ftol: 1e-10, gtol: 1e-9 }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sup_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Minimize `f` (returning value and gradient) with L-BFGS and an Armijo
/// backtracking line search. Non-finite trial values are treated as failed steps.
pub fn lbfgs<F>(mut f: F, x0: Vec<f64>, opts: LbfgsOptions) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let mut x = x0;
    let (mut fx, mut g) = f(&x)?;
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut quiet_steps = 0;

    for iter in 0..opts.max_iters {
        if sup_norm(&g) < opts.gtol {
            return Ok(Minimum { x, value: fx, iterations: iter, converged: true });
        }

        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(s_hist.len());
        for (s, y) in s_hist.iter().zip(&y_hist).rev() {
            let rho = 1.0 / dot(y, s);
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push((a, rho));
        }
        if let (Some(s), Some(y)) = (s_hist.last(), y_hist.last()) {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|qi| *qi *= gamma);
        }
        for ((s, y), (a, rho)) in s_hist.iter().zip(&y_hist).zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut dir: Vec<f64> = q.into_iter().map(|v| -v).collect();
        let mut slope = dot(&dir, &g);
        if slope.is_nan() || slope >= 0.0 {
            s_hist.clear();
            y_hist.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&dir, &g);
        }

        let mut step = if s_hist.is_empty() { 1.0 / sup_norm(&g).max(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let (ft, gt) = f(&trial)?;
            if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            // No descent possible at machine precision: a stationary point for our purposes.
            return Ok(Minimum { x, value: fx, iterations: iter, converged: sup_norm(&g) < 1e3 * opts.gtol });
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        if dot(&s, &y) > 1e-16 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            s_hist.push(s);
            y_hist.push(y);
            if s_hist.len() > opts.memory {
                s_hist.remove(0);
                y_hist.remove(0);
            }
        }

        let change = (fx - f_new).abs();
        x = x_new;
        fx = f_new;
        g = g_new;
        quiet_steps = if change < opts.ftol { quiet_steps + 1 } else { 0 };
        if quiet_steps >= 2 {
            return Ok(Minimum { x, value: fx, iterations: iter + 1, converged: true });
        }
    }
    Ok(Minimum { x, value: fx, iterations: opts.max_iters, converged: false })
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
/// Returns the best point seen, including the endpoints.
pub fn golden_max(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, b);
    let mut best = (a, f(a));
    let fb = f(b);
    if fb > best.1 {
        best = (b, fb);
    }
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    for (x, fx) in [(x1, f1), (x2, f2)] {
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Largest `t` in `[lo, hi]` with `pred(t)` true, for a predicate that is true
/// on an initial segment. Assumes `pred(lo)`.
pub fn bisect_last_true(mut pred: impl FnMut(f64) -> bool, lo: f64, hi: f64, iters: usize) -> f64 {
    if pred(hi) {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..iters {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if pred(m) {
            a = m;
        } else {
            b = m;
        }
    }
    a
}

/// Divided-difference matrix `Γ_ij = (f(h_i) − f(h_j))/(h_i − h_j)`, with
/// `f'(h_i)` on (near-)coincident pairs.
fn first_divided_differences(h: &[f64], f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> Vec<Vec<f64>> {
    let fv: Vec<f64> = h.iter().map(|&t| f(t)).collect();
    let n = h.len();
    let mut gamma = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let d = h[i] - h[j];
            gamma[i][j] = if d.abs() <= 1e-9 * (1.0 + h[i].abs().max(h[j].abs())) {
                df(0.5 * (h[i] + h[j]))
            } else {
                (fv[i] - fv[j]) / d
            };
        }
    }
    gamma
}

/// Gradient with respect to `H` of `H ↦ Tr(G f(H))`, i.e. `V (Γ ∘ V†GV) V†`.
pub fn spectral_gradient(
    h: &HermMatrix,
    g: &HermMatrix,
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
) -> Result<HermMatrix> {
    let sp = h.spectrum()?;
    let gamma = first_divided_differences(&sp.values, f, df);
    let v = &sp.vectors;
    let inner = v.adjoint() * g.as_mat() * v;
    let n = h.dim();
    let weighted = Mat::from_fn(n, n, |i, j| inner[(i, j)] * gamma[i][j]);
    Ok(HermMatrix::from_hermitian_unchecked(v * &weighted * v.adjoint()))
}

/// Number of real parameters of a `d × d` Hermitian matrix.
pub fn herm_param_count(d: usize) -> usize {
    d * d
}

/// Hermitian matrix from `d²` reals: diagonal first, then `(Re, Im)` of the
/// strict upper triangle in row-major order.
pub fn herm_from_params(params: &[f64], d: usize) -> HermMatrix {
    let mut m = Mat::<c64>::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = c64::new(params[i], 0.0);
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            let z = c64::new(params[k], params[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    HermMatrix::from_hermitian_unchecked(m)
}

/// Inverse of [`herm_from_params`].
pub fn herm_to_params(h: &HermMatrix) -> Vec<f64> {
    let d = h.dim();
    let mut out: Vec<f64> = (0..d).map(|i| h.get(i, i).re).collect();
    for i in 0..d {
        for j in i + 1..d {
            out.push(h.get(i, j).re);
            out.push(h.get(i, j).im);
        }
    }
    out
}

/// Parameter gradient of `H ↦ Tr(G H)` for Hermitian `G`, in the layout of
/// [`herm_from_params`].
pub fn herm_grad_to_params(g: &HermMatrix) -> Vec<f64> {
    let d = g.dim();
    let mut out: Vec<f64> = (0..d).map(|i| g.get(i, i).re).collect();
    for i in 0..d {
        for j in i + 1..d {
            let z = g.get(i, j);
            out.push(2.0 * z.re);
            out.push(2.0 * z.im);
        }
    }
    out
}
