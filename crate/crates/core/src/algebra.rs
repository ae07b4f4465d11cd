//! Unital *-subalgebras of `M_d`, their trace-preserving conditional
//! expectations, and the state reductions built on them.
//!
//! A [`Subalgebra`] is `U (⊕_k M_{m_k} ⊗ 1_{n_k}) U†`. Inside the `k`-th
//! diagonal block (size `m_k n_k`) the row index is `i·n_k + j` with
//! `i < m_k` the matrix index and `j < n_k` the multiplicity index, so the
//! block is a Kronecker product `a ⊗ 1_{n_k}`.

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::divergences::{sandwiched_d, ExtReal, FdState};
use crate::error::{Error, Result};
use crate::linalg::{c64, max_abs, HermMatrix, Projection};

/// Largest ambient dimension a tensor power may reach.
pub const MAX_TENSOR_DIM: usize = 1 << 14;

/// Relative eigenvalue gap below which σ-eigenvalues share a pinching projection.
pub const PINCHING_GAP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Subalgebra {
    unitary: Mat<c64>,
    pattern: Vec<(usize, usize)>,
}

impl Subalgebra {
    pub fn new(unitary: Mat<c64>, pattern: Vec<(usize, usize)>) -> Result<Self> {
        let d = unitary.nrows();
        if unitary.ncols() != d {
            return Err(Error::NotSquare(d, unitary.ncols()));
        }
        if pattern.is_empty() || pattern.iter().any(|&(m, n)| m == 0 || n == 0) {
            return Err(Error::InvalidSubalgebra("pattern entries must be positive".into()));
        }
        let covered: usize = pattern.iter().map(|&(m, n)| m * n).sum();
        if covered != d {
            return Err(Error::InvalidSubalgebra(format!("pattern covers {covered} of {d} dimensions")));
        }
        let gram = unitary.adjoint() * &unitary;
        let residual = max_abs((gram - Mat::<c64>::identity(d, d)).as_ref());
        if residual > 1e-10 {
            return Err(Error::InvalidSubalgebra(format!("basis change is not unitary (residual {residual:e})")));
        }
        Ok(Self { unitary, pattern })
    }

    /// Block pattern in the standard basis.
    pub fn from_pattern(pattern: Vec<(usize, usize)>) -> Result<Self> {
        let d = pattern.iter().map(|&(m, n)| m * n).sum();
        Self::new(Mat::identity(d, d), pattern)
    }

    /// `M_d` itself.
    pub fn full(d: usize) -> Self {
        Self { unitary: Mat::identity(d, d), pattern: vec![(d, 1)] }
    }

    /// The scalars `C·1`.
    pub fn scalars(d: usize) -> Self {
        Self { unitary: Mat::identity(d, d), pattern: vec![(1, d)] }
    }

    /// Diagonal matrices in the standard basis.
    pub fn diagonal(d: usize) -> Self {
        Self { unitary: Mat::identity(d, d), pattern: vec![(1, 1); d] }
    }

    /// The same pattern conjugated by `v`: `v N v†`.
    pub fn rotated(&self, v: MatRef<'_, c64>) -> Result<Self> {
        Self::new(v * &self.unitary, self.pattern.clone())
    }

    pub fn dim(&self) -> usize {
        self.unitary.nrows()
    }

    pub fn unitary(&self) -> MatRef<'_, c64> {
        self.unitary.as_ref()
    }

    pub fn pattern(&self) -> &[(usize, usize)] {
        &self.pattern
    }

    /// Block dimensions `m_k` of the abstract algebra `⊕ M_{m_k}`.
    pub fn block_dims(&self) -> Vec<usize> {
        self.pattern.iter().map(|&(m, _)| m).collect()
    }

    fn offsets(&self) -> Vec<usize> {
        self.pattern
            .iter()
            .scan(0, |acc, &(m, n)| {
                let o = *acc;
                *acc += m * n;
                Some(o)
            })
            .collect()
    }

    /// Compressed blocks `b_k = (1/n_k) Tr_{n_k}[(U†xU)_kk]`.
    fn compress(&self, x: MatRef<'_, c64>) -> Vec<Mat<c64>> {
        let y = self.unitary.adjoint() * x * &self.unitary;
        self.pattern
            .iter()
            .zip(self.offsets())
            .map(|(&(m, n), o)| {
                Mat::from_fn(m, m, |i, ip| {
                    let s: c64 = (0..n).map(|j| y[(o + i * n + j, o + ip * n + j)]).sum();
                    s / n as f64
                })
            })
            .collect()
    }

    /// `U (⊕ b_k ⊗ 1_{n_k}) U†`.
    fn expand(&self, blocks: &[Mat<c64>]) -> Mat<c64> {
        let d = self.dim();
        let mut z = Mat::<c64>::zeros(d, d);
        for ((&(m, n), o), b) in self.pattern.iter().zip(self.offsets()).zip(blocks) {
            for i in 0..m {
                for ip in 0..m {
                    for j in 0..n {
                        z[(o + i * n + j, o + ip * n + j)] = b[(i, ip)];
                    }
                }
            }
        }
        &self.unitary * z * self.unitary.adjoint()
    }

    /// Trace-preserving conditional expectation on arbitrary complex matrices.
    pub fn expectation_of(&self, x: MatRef<'_, c64>) -> Result<Mat<c64>> {
        if x.nrows() != self.dim() || x.ncols() != self.dim() {
            return Err(Error::DimMismatch { left: x.nrows(), right: self.dim() });
        }
        Ok(self.expand(&self.compress(x)))
    }

    /// Matrix units `U (e_ab ⊗ 1_{n_k}) U†` spanning the subalgebra.
    pub fn matrix_units(&self) -> Vec<Mat<c64>> {
        let mut out = Vec::new();
        for (k, &(m, _)) in self.pattern.iter().enumerate() {
            for a in 0..m {
                for b in 0..m {
                    let blocks: Vec<Mat<c64>> = self
                        .pattern
                        .iter()
                        .enumerate()
                        .map(|(kk, &(mm, _))| {
                            Mat::from_fn(mm, mm, |i, j| {
                                if kk == k && i == a && j == b {
                                    c64::new(1.0, 0.0)
                                } else {
                                    c64::new(0.0, 0.0)
                                }
                            })
                        })
                        .collect();
                    out.push(self.expand(&blocks));
                }
            }
        }
        out
    }

    /// `E_N ∘ E_other = E_N` on the Hermitian matrix-unit basis of `M_d`,
    /// which holds exactly when `N ⊆ other`.
    pub fn is_contained_in(&self, other: &Subalgebra, tol: f64) -> Result<bool> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch { left: self.dim(), right: other.dim() });
        }
        for h in hermitian_basis(self.dim()) {
            let direct = self.expectation_of(h.as_ref())?;
            let composed = self.expectation_of(other.expectation_of(h.as_ref())?.as_ref())?;
            if max_abs((direct - composed).as_ref()) > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Hermitian basis of `M_d`: `e_ii`, `e_ij + e_ji`, `i(e_ij − e_ji)`.
fn hermitian_basis(d: usize) -> Vec<Mat<c64>> {
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in i..d {
            if i == j {
                out.push(Mat::from_fn(d, d, |a, b| unit(a == i && b == i)));
            } else {
                out.push(Mat::from_fn(d, d, |a, b| unit((a == i && b == j) || (a == j && b == i))));
                out.push(Mat::from_fn(d, d, |a, b| {
                    if a == i && b == j {
                        c64::new(0.0, 1.0)
                    } else if a == j && b == i {
                        c64::new(0.0, -1.0)
                    } else {
                        c64::new(0.0, 0.0)
                    }
                }));
            }
        }
    }
    out
}

fn unit(on: bool) -> c64 {
    c64::new(if on { 1.0 } else { 0.0 }, 0.0)
}

/// Wire format: `{"dim": d, "unitary": [[[re, im], …], …], "pattern": [[m, n], …]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubalgebraSpec {
    pub dim: usize,
    pub unitary: Vec<Vec<[f64; 2]>>,
    pub pattern: Vec<[usize; 2]>,
}

impl TryFrom<SubalgebraSpec> for Subalgebra {
    type Error = Error;

    fn try_from(spec: SubalgebraSpec) -> Result<Self> {
        let d = spec.dim;
        if spec.unitary.len() != d || spec.unitary.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidSubalgebra(format!("unitary must be {d}x{d}")));
        }
        let u = Mat::from_fn(d, d, |i, j| c64::new(spec.unitary[i][j][0], spec.unitary[i][j][1]));
        Subalgebra::new(u, spec.pattern.iter().map(|p| (p[0], p[1])).collect())
    }
}

impl From<&Subalgebra> for SubalgebraSpec {
    fn from(n: &Subalgebra) -> Self {
        let d = n.dim();
        SubalgebraSpec {
            dim: d,
            unitary: (0..d)
                .map(|i| (0..d).map(|j| [n.unitary[(i, j)].re, n.unitary[(i, j)].im]).collect())
                .collect(),
            pattern: n.pattern.iter().map(|&(m, k)| [m, k]).collect(),
        }
    }
}

/// An increasing sequence of subalgebras of `M_d`.
#[derive(Debug, Clone)]
pub struct SubalgebraChain {
    links: Vec<Subalgebra>,
}

impl SubalgebraChain {
    /// Validates dimensions and nestedness of consecutive links.
    pub fn new(links: Vec<Subalgebra>) -> Result<Self> {
        if links.is_empty() {
            return Err(Error::InvalidSubalgebra("a chain needs at least one link".into()));
        }
        for w in links.windows(2) {
            if !w[0].is_contained_in(&w[1], 1e-9)? {
                return Err(Error::InvalidSubalgebra("chain is not increasing".into()));
            }
        }
        Ok(Self { links })
    }

    pub fn links(&self) -> &[Subalgebra] {
        &self.links
    }

    pub fn dim(&self) -> usize {
        self.links[0].dim()
    }
}

/// `E_N(x)` for Hermitian `x`.
pub fn conditional_expectation(x: &HermMatrix, n: &Subalgebra) -> Result<HermMatrix> {
    Ok(HermMatrix::from_hermitian_unchecked(n.expectation_of(x.as_mat())?))
}

/// `ρ|_N` as a functional on `⊕ M_{m_k}`. The `k`-th block is `n_k b_k`, so
/// that divergences of restricted pairs equal those of `(E(ρ), E(σ))`
/// computed as `d × d` matrices.
pub fn restrict_state(rho: &FdState, n: &Subalgebra) -> Result<FdState> {
    let density = rho.density();
    if density.dim() != n.dim() {
        return Err(Error::DimMismatch { left: density.dim(), right: n.dim() });
    }
    let blocks = n
        .compress(density.as_mat())
        .into_iter()
        .zip(n.pattern())
        .map(|(b, &(_, mult))| {
            let m = b.nrows();
            HermMatrix::from_hermitian_unchecked(Mat::from_fn(m, m, |i, j| b[(i, j)] * mult as f64))
        })
        .collect();
    FdState::new(blocks)
}

/// Restriction to `eMe ⊕ C(1 − e)`: the compression of `ρ` to the range of
/// `e` (in the basis of [`Projection::range_basis`]) and the scalar `ρ(1 − e)`.
pub fn corner_restrict(rho: &FdState, e: &Projection) -> Result<FdState> {
    let density = rho.density();
    if density.dim() != e.dim() {
        return Err(Error::DimMismatch { left: density.dim(), right: e.dim() });
    }
    let basis = e.range_basis()?;
    let compressed = HermMatrix::from_hermitian_unchecked(basis.adjoint() * density.as_mat() * &basis);
    let rest = density.trace_product(e.complement().matrix()).max(0.0);
    FdState::new(vec![compressed, HermMatrix::diagonal(&[rest])])
}

/// Number of distinct eigenvalues of each block of `σ`, maximized over blocks.
pub fn pinching_constant(sigma: &FdState) -> Result<usize> {
    let mut v = 0;
    for b in sigma.blocks() {
        v = v.max(b.eigenspaces(PINCHING_GAP)?.len());
    }
    Ok(v)
}

/// `Σ_j P_j ρ P_j` over the spectral projections of `σ`, blockwise.
pub fn pinch(rho: &FdState, sigma: &FdState) -> Result<FdState> {
    let (a, b) = (rho.algebra(), sigma.algebra());
    if a != b {
        return Err(Error::AlgebraMismatch { left: a, right: b });
    }
    let mut blocks = Vec::with_capacity(a.len());
    for (r, s) in rho.blocks().iter().zip(sigma.blocks()) {
        let d = r.dim();
        let mut acc = Mat::<c64>::zeros(d, d);
        for space in s.eigenspaces(PINCHING_GAP)? {
            let v = &space.basis;
            acc += v * (v.adjoint() * r.as_mat() * v) * v.adjoint();
        }
        blocks.push(HermMatrix::from_hermitian_unchecked(acc));
    }
    FdState::new(blocks)
}

/// `ρ^{⊗n}`, refusing ambient dimensions above [`MAX_TENSOR_DIM`].
pub fn tensor_power_state(rho: &FdState, n: usize) -> Result<FdState> {
    if n == 0 {
        return Err(Error::InvalidArgument("tensor power needs n >= 1".into()));
    }
    let d = rho.dim();
    let total = (d as f64).powi(n as i32);
    if total > MAX_TENSOR_DIM as f64 {
        return Err(Error::TooLarge(format!("{d}^{n} exceeds {MAX_TENSOR_DIM}")));
    }
    let mut out = rho.clone();
    for _ in 1..n {
        out = out.tensor(rho);
    }
    Ok(out)
}

/// Largest `n` accepted by [`qubit_tensor_power`].
pub const MAX_QUBIT_POWER: usize = 48;

/// `ρ^{⊗n}` for a qubit state, written on the commutant-reduced algebra
/// `⊕_s M_{s+1}` with `s = n, n−2, …`. Schur–Weyl duality gives
/// `A^{⊗n} ≅ ⊕_s det(A)^{(n−s)/2} Sym^s(A) ⊗ 1_{m_s}`; block `s` stores
/// `m_s det(A)^{(n−s)/2} Sym^s(A)`, so every unitarily invariant quantity
/// (spectra, divergences, optimal tests) of the tensor power is preserved.
pub fn qubit_tensor_power(rho: &FdState, n: usize) -> Result<FdState> {
    if rho.algebra() != [2] {
        return Err(Error::InvalidArgument("qubit tensor power needs a single 2x2 block".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("tensor power needs n >= 1".into()));
    }
    if n > MAX_QUBIT_POWER {
        return Err(Error::TooLarge(format!("qubit tensor power {n} exceeds {MAX_QUBIT_POWER}")));
    }
    let a = rho.blocks()[0].as_mat();
    let det = (a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]).re.max(0.0);
    let mut blocks = Vec::new();
    let mut s = n as i64;
    while s >= 0 {
        let s_u = s as usize;
        let k = (n - s_u) / 2;
        let mult = binomial(n, k) - if k > 0 { binomial(n, k - 1) } else { 0.0 };
        let weight = mult * det.powi(k as i32);
        let sym = symmetric_power(a, s_u);
        blocks.push(HermMatrix::from_hermitian_unchecked(Mat::from_fn(s_u + 1, s_u + 1, |i, j| sym[(i, j)] * weight)));
        s -= 2;
    }
    FdState::new(blocks)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn cpow(z: c64, e: usize) -> c64 {
    (0..e).fold(c64::new(1.0, 0.0), |acc, _| acc * z)
}

/// `Sym^s(A)` of a 2×2 matrix in the orthonormal symmetric basis `|s, k⟩`.
fn symmetric_power(a: MatRef<'_, c64>, s: usize) -> Mat<c64> {
    let (a11, a12, a21, a22) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    Mat::from_fn(s + 1, s + 1, |kp, k| {
        // coefficient of e1^{s−k'} e2^{k'} in (a11 e1 + a21 e2)^{s−k} (a12 e1 + a22 e2)^k
        let lo = kp.saturating_sub(k);
        let hi = (s - k).min(kp);
        let mut acc = c64::new(0.0, 0.0);
        for i in lo..=hi {
            let c = binomial(s - k, i) * binomial(k, kp - i);
            acc += cpow(a21, i) * cpow(a11, s - k - i) * cpow(a22, kp - i) * cpow(a12, k + i - kp) * c;
        }
        acc * (binomial(s, k) / binomial(s, kp)).sqrt()
    })
}

/// `D*_α` of the restricted pair at every link of the chain.
pub fn martingale_sequence(
    rho: &FdState,
    sigma: &FdState,
    chain: &SubalgebraChain,
    alpha: f64,
) -> Result<Vec<ExtReal>> {
    chain
        .links()
        .iter()
        .map(|n| sandwiched_d(&restrict_state(rho, n)?, &restrict_state(sigma, n)?, alpha))
        .collect()
}

/// The chain `C·1 ⊂ C1_2 ⊕ C1_2 ⊂ M_2 ⊗ 1_2 ⊂ M_4`, conjugated by `u`.
pub fn standard_chain_m4(u: MatRef<'_, c64>) -> Result<SubalgebraChain> {
    let links = [vec![(1, 4)], vec![(1, 2), (1, 2)], vec![(2, 2)], vec![(4, 1)]]
        .into_iter()
        .map(|p| Subalgebra::new(u.to_owned(), p))
        .collect::<Result<Vec<_>>>()?;
    SubalgebraChain::new(links)
}

/// The chain `C1_2 ⊕ C1_2 ⊂ C ⊕ C ⊕ C1_2 ⊂ M_2 ⊕ C1_2 ⊂ M_4`, conjugated by `u`.
pub fn corner_chain_m4(u: MatRef<'_, c64>) -> Result<SubalgebraChain> {
    let links = [vec![(1, 2), (1, 2)], vec![(1, 1), (1, 1), (1, 2)], vec![(2, 1), (1, 2)], vec![(4, 1)]]
        .into_iter()
        .map(|p| Subalgebra::new(u.to_owned(), p))
        .collect::<Result<Vec<_>>>()?;
    SubalgebraChain::new(links)
}
