//! Dense Hermitian matrix calculus.
//!
//! [`HermMatrix`] wraps a complex square matrix that is Hermitian up to
//! rounding and lazily caches its spectral decomposition. Functional calculus
//! on the support ("pseudo-calculus") maps eigenvalues below a relative cutoff
//! to zero, which gives pseudo-inverses and negative powers of rank-deficient
//! densities their usual meaning.

use std::sync::OnceLock;

use faer::{Mat, MatRef, Side};

pub use faer::c64;

use crate::error::{Error, Result};

/// Default relative cutoff separating the support from the kernel.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Relative tolerance of the hermiticity check on construction.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Eigenvalues (ascending) and matching orthonormal eigenvectors (columns).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Mat<c64>,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_radius(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// Reassemble `U diag(values) U†`.
    pub fn reconstruct(&self) -> Mat<c64> {
        assemble(&self.vectors, &self.values)
    }
}

/// An orthonormal basis of an eigenspace together with its eigenvalue.
#[derive(Debug, Clone)]
pub struct Eigenspace {
    pub value: f64,
    pub basis: Mat<c64>,
}

impl Eigenspace {
    pub fn projector(&self) -> Projection {
        Projection(HermMatrix::from_hermitian_unchecked(&self.basis * self.basis.adjoint()))
    }
}

/// Dense complex Hermitian matrix with a lazily filled spectral cache.
#[derive(Debug, Clone)]
pub struct HermMatrix {
    entries: Mat<c64>,
    spectrum: OnceLock<Spectrum>,
}

impl PartialEq for HermMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl HermMatrix {
    /// Validates hermiticity relative to the largest entry, then stores the
    /// exactly symmetrized matrix.
    pub fn new(entries: Mat<c64>) -> Result<Self> {
        let (r, c) = (entries.nrows(), entries.ncols());
        if r != c {
            return Err(Error::NotSquare(r, c));
        }
        let scale = max_abs(entries.as_ref());
        let mut deviation = 0.0f64;
        for j in 0..c {
            for i in 0..=j {
                deviation = deviation.max((entries[(i, j)] - entries[(j, i)].conj()).norm());
            }
        }
        let tolerance = HERMITICITY_TOL * scale;
        if deviation > tolerance {
            return Err(Error::NonHermitian { deviation, tolerance });
        }
        Ok(Self::from_hermitian_unchecked(entries))
    }

    /// Symmetrizes without checking. For products that are Hermitian in exact
    /// arithmetic.
    pub(crate) fn from_hermitian_unchecked(entries: Mat<c64>) -> Self {
        let n = entries.nrows();
        let sym = Mat::from_fn(n, n, |i, j| {
            if i == j {
                c64::new(entries[(i, i)].re, 0.0)
            } else {
                (entries[(i, j)] + entries[(j, i)].conj()) * 0.5
            }
        });
        Self { entries: sym, spectrum: OnceLock::new() }
    }

    fn with_spectrum(entries: Mat<c64>, spectrum: Spectrum) -> Self {
        let cell = OnceLock::new();
        let _ = cell.set(spectrum);
        Self { entries, spectrum: cell }
    }

    /// `U diag(values) U†` for orthonormal columns `U`; the pair becomes the
    /// cached spectrum.
    pub fn from_spectrum(values: Vec<f64>, vectors: Mat<c64>) -> Result<Self> {
        check_dims(vectors.ncols(), values.len())?;
        check_dims(vectors.nrows(), values.len())?;
        Ok(from_eigenpairs(&vectors, values))
    }

    /// `L L†` for a `d × m` factor (`m ≥ d`), with its spectrum taken from the
    /// singular value decomposition of `L`. The small eigenvalues keep far more accuracy than an eigensolver
    /// applied to the assembled product would give them.
    pub fn from_factor(l: MatRef<'_, c64>) -> Result<Self> {
        if l.ncols() < l.nrows() {
            return Err(Error::DimMismatch { left: l.nrows(), right: l.ncols() });
        }
        let svd = l.svd().map_err(|_| Error::EigenFailure)?;
        let values: Vec<f64> = svd.S().column_vector().iter().map(|s| s.re * s.re).collect();
        Ok(from_eigenpairs(&svd.U().to_owned(), values))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_hermitian_unchecked(Mat::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_hermitian_unchecked(Mat::from_fn(n, n, |i, j| {
            if i == j {
                c64::new(values[i], 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        }))
    }

    /// Build from real row-major entries.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare(n, bad.len()));
        }
        Self::new(Mat::from_fn(n, n, |i, j| c64::new(rows[i][j], 0.0)))
    }

    /// Build from complex row-major entries.
    pub fn from_rows(rows: &[Vec<c64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare(n, bad.len()));
        }
        Self::new(Mat::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// The rank-one operator |ψ⟩⟨ψ| (no normalization).
    pub fn outer(psi: &[c64]) -> Self {
        let n = psi.len();
        Self::from_hermitian_unchecked(Mat::from_fn(n, n, |i, j| psi[i] * psi[j].conj()))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.entries.as_ref()
    }

    pub fn into_mat(self) -> Mat<c64> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.entries[(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(self.entries.as_ref())
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).sum()
    }

    /// Re Tr(AB); exact for Hermitian A, B.
    pub fn trace_product(&self, other: &HermMatrix) -> f64 {
        trace_product(self.as_mat(), other.as_mat())
    }

    /// `Tr(self · x)` evaluated through the spectrum of `x`, as
    /// `Σ μ_i ⟨v_i|self|v_i⟩`. Avoids cancellation when `x` is ill-conditioned.
    pub fn trace_product_spectral(&self, x: &HermMatrix) -> Result<f64> {
        check_dims(self.dim(), x.dim())?;
        let sp = x.spectrum()?;
        let inner = sp.vectors.adjoint() * &self.entries * &sp.vectors;
        Ok(sp.values.iter().enumerate().map(|(i, mu)| mu * inner[(i, i)].re).sum())
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries.norm_l2()
    }

    /// Spectral decomposition, computed once. Eigenvalues are ascending and
    /// each eigenvector's first significant component is real positive.
    pub fn spectrum(&self) -> Result<&Spectrum> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let computed = compute_spectrum(self.entries.as_ref())?;
        // A concurrent fill computed the same decomposition; either copy is fine.
        let _ = self.spectrum.set(computed);
        Ok(self.spectrum.get().expect("spectrum cache filled above"))
    }

    pub fn eigenvalues(&self) -> Result<&[f64]> {
        Ok(&self.spectrum()?.values)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.spectrum()?.min())
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(self.spectrum()?.max())
    }

    pub fn scale(&self, s: f64) -> HermMatrix {
        let n = self.dim();
        let m = Mat::from_fn(n, n, |i, j| self.entries[(i, j)] * s);
        match self.spectrum.get() {
            Some(sp) if s >= 0.0 => HermMatrix::with_spectrum(
                m,
                Spectrum {
                    values: sp.values.iter().map(|v| v * s).collect(),
                    vectors: sp.vectors.clone(),
                },
            ),
            _ => HermMatrix::from_hermitian_unchecked(m),
        }
    }

    pub fn add(&self, other: &HermMatrix) -> Result<HermMatrix> {
        check_dims(self.dim(), other.dim())?;
        Ok(HermMatrix::from_hermitian_unchecked(&self.entries + &other.entries))
    }

    pub fn sub(&self, other: &HermMatrix) -> Result<HermMatrix> {
        check_dims(self.dim(), other.dim())?;
        Ok(HermMatrix::from_hermitian_unchecked(&self.entries - &other.entries))
    }

    /// `self · x · self`.
    pub fn sandwich(&self, x: &HermMatrix) -> Result<HermMatrix> {
        check_dims(self.dim(), x.dim())?;
        Ok(HermMatrix::from_hermitian_unchecked(
            &self.entries * &x.entries * &self.entries,
        ))
    }

    /// `K · self · K†` for a rectangular `K`.
    pub fn congruence(&self, k: MatRef<'_, c64>) -> Result<HermMatrix> {
        check_dims(k.ncols(), self.dim())?;
        Ok(HermMatrix::from_hermitian_unchecked(k * &self.entries * k.adjoint()))
    }

    /// Frobenius norm of the commutator `[self, other]`.
    pub fn commutator_norm(&self, other: &HermMatrix) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        let ab = &self.entries * &other.entries;
        let ba = &other.entries * &self.entries;
        Ok((ab - ba).norm_l2())
    }

    /// Apply `f` to every eigenvalue. The result carries its spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<HermMatrix> {
        let sp = self.spectrum()?;
        let values: Vec<f64> = sp.values.iter().map(|&v| f(v)).collect();
        Ok(from_eigenpairs(&sp.vectors, values))
    }

    /// Pseudo-calculus on the support; see [`fn_on_support`].
    pub fn fn_on_support(&self, f: impl Fn(f64) -> f64, tol: f64) -> Result<HermMatrix> {
        let sp = self.spectrum()?;
        check_psd(sp, tol)?;
        let cutoff = support_cutoff(sp, tol);
        let values: Vec<f64> = sp
            .values
            .iter()
            .map(|&v| if v > cutoff { f(v) } else { 0.0 })
            .collect();
        Ok(from_eigenpairs(&sp.vectors, values))
    }

    /// `A^p` on the support with the default cutoff.
    pub fn power(&self, p: f64) -> Result<HermMatrix> {
        self.fn_on_support(|t| t.powf(p), SUPPORT_TOL)
    }

    pub fn support_projection(&self, tol: f64) -> Result<Projection> {
        Ok(Projection(self.fn_on_support(|_| 1.0, tol)?))
    }

    /// Numerical rank relative to the default cutoff.
    pub fn rank(&self) -> Result<usize> {
        let sp = self.spectrum()?;
        let cutoff = support_cutoff(sp, SUPPORT_TOL);
        Ok(sp.values.iter().filter(|&&v| v > cutoff).count())
    }

    /// Positive-semidefinite within `tol · max(|λ|, 1)`.
    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        let sp = self.spectrum()?;
        Ok(check_psd(sp, tol).is_ok())
    }

    /// Eigenspaces, grouping ascending eigenvalues whose consecutive gap is at
    /// most `rel_gap · max(‖A‖, tiny)`.
    pub fn eigenspaces(&self, rel_gap: f64) -> Result<Vec<Eigenspace>> {
        let sp = self.spectrum()?;
        let n = self.dim();
        let gap = rel_gap * sp.spectral_radius().max(f64::MIN_POSITIVE);
        let mut groups: Vec<(usize, usize)> = Vec::new();
        let mut start = 0;
        for i in 1..=n {
            if i == n || sp.values[i] - sp.values[i - 1] > gap {
                groups.push((start, i));
                start = i;
            }
        }
        Ok(groups
            .into_iter()
            .map(|(a, b)| Eigenspace {
                value: sp.values[a..b].iter().sum::<f64>() / (b - a) as f64,
                basis: sp.vectors.as_ref().subcols(a, b - a).to_owned(),
            })
            .collect())
    }

    pub fn kron(&self, other: &HermMatrix) -> HermMatrix {
        tensor(self, other)
    }
}

/// A Hermitian idempotent.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection(HermMatrix);

impl Projection {
    /// Validate `P² = P` within 1e-10 and eigenvalues in {0, 1} within 1e-8.
    pub fn new(matrix: HermMatrix) -> Result<Self> {
        let sq = matrix.as_mat() * matrix.as_mat();
        let residual = max_abs((sq - matrix.as_mat()).as_ref());
        if residual > 1e-10 {
            return Err(Error::NotProjection(residual));
        }
        let worst = matrix
            .eigenvalues()?
            .iter()
            .map(|&v| v.abs().min((v - 1.0).abs()))
            .fold(0.0f64, f64::max);
        if worst > 1e-8 {
            return Err(Error::NotProjection(worst));
        }
        Ok(Projection(matrix))
    }

    /// Projection onto the span of orthonormal columns.
    pub fn from_orthonormal_columns(v: MatRef<'_, c64>) -> Self {
        Projection(HermMatrix::from_hermitian_unchecked(v * v.adjoint()))
    }

    pub fn identity(dim: usize) -> Self {
        Projection(HermMatrix::identity(dim))
    }

    pub fn zero(dim: usize) -> Self {
        Projection(HermMatrix::zeros(dim))
    }

    pub fn matrix(&self) -> &HermMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn rank(&self) -> usize {
        self.0.trace().round() as usize
    }

    pub fn complement(&self) -> Projection {
        Projection(HermMatrix::identity(self.dim()).sub(&self.0).expect("same dim"))
    }

    /// Orthonormal basis of the range, as columns.
    pub fn range_basis(&self) -> Result<Mat<c64>> {
        let sp = self.0.spectrum()?;
        let n = self.dim();
        let first = sp.values.iter().position(|&v| v > 0.5).unwrap_or(n);
        Ok(sp.vectors.as_ref().subcols(first, n - first).to_owned())
    }

    /// Range containment `P ≤ Q`, checked as a Löwner inequality.
    pub fn is_subprojection_of(&self, other: &Projection, tol: f64) -> Result<bool> {
        loewner_leq(&self.0, &other.0, tol)
    }
}

/// Spectral decomposition with ascending eigenvalues.
pub fn eig_hermitian(a: &HermMatrix) -> Result<(Vec<f64>, Mat<c64>)> {
    let sp = a.spectrum()?;
    Ok((sp.values.clone(), sp.vectors.clone()))
}

/// `Σ_{λ_i > cutoff} f(λ_i) P_i` with `cutoff = tol · max(λ_max, 1)`.
/// Fails with [`Error::NegativeSpectrum`] if `λ_min < −tol · max(|λ|, 1)`.
pub fn fn_on_support(a: &HermMatrix, f: impl Fn(f64) -> f64, tol: f64) -> Result<HermMatrix> {
    a.fn_on_support(f, tol)
}

pub fn support_projection(a: &HermMatrix, tol: f64) -> Result<Projection> {
    a.support_projection(tol)
}

/// `A ≤ B` in Löwner order: the smallest eigenvalue of `B − A` is at least `−tol`.
pub fn loewner_leq(a: &HermMatrix, b: &HermMatrix, tol: f64) -> Result<bool> {
    let diff = b.sub(a)?;
    Ok(diff.min_eigenvalue()? >= -tol)
}

/// Kronecker product.
pub fn tensor(a: &HermMatrix, b: &HermMatrix) -> HermMatrix {
    HermMatrix::from_hermitian_unchecked(a.as_mat().kron(b.as_mat()))
}

/// Block-diagonal assembly.
pub fn direct_sum(blocks: &[HermMatrix]) -> HermMatrix {
    let n: usize = blocks.iter().map(HermMatrix::dim).sum();
    let mut out = Mat::<c64>::zeros(n, n);
    let mut offset = 0;
    for b in blocks {
        let d = b.dim();
        out.as_mut().submatrix_mut(offset, offset, d, d).copy_from(b.as_mat());
        offset += d;
    }
    HermMatrix::from_hermitian_unchecked(out)
}

/// Matrix exponential of `i·H` for Hermitian `H`: a unitary.
pub fn exp_i(h: &HermMatrix) -> Result<Mat<c64>> {
    let sp = h.spectrum()?;
    let n = h.dim();
    let mut scaled = sp.vectors.clone();
    for j in 0..n {
        let phase = c64::from_polar(1.0, sp.values[j]);
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    Ok(&scaled * sp.vectors.adjoint())
}

pub(crate) fn max_abs(m: MatRef<'_, c64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

/// Re Tr(AB) = Re Σ_ij A_ij B_ji.
pub(crate) fn trace_product(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            let (x, y) = (a[(i, j)], b[(j, i)]);
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

pub(crate) fn check_dims(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimMismatch { left, right })
    }
}

pub(crate) fn support_cutoff(sp: &Spectrum, tol: f64) -> f64 {
    tol * sp.max().max(1.0)
}

fn check_psd(sp: &Spectrum, tol: f64) -> Result<()> {
    let min = sp.min();
    if min < -tol * sp.spectral_radius().max(1.0) {
        Err(Error::NegativeSpectrum { min_eigenvalue: min })
    } else {
        Ok(())
    }
}

fn assemble(vectors: &Mat<c64>, values: &[f64]) -> Mat<c64> {
    let n = vectors.nrows();
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        for i in 0..n {
            scaled[(i, j)] *= v;
        }
    }
    &scaled * vectors.adjoint()
}

/// Build `U diag(values) U†` and keep the (re-sorted) eigenpairs as its cache.
fn from_eigenpairs(vectors: &Mat<c64>, values: Vec<f64>) -> HermMatrix {
    let entries = assemble(vectors, &values);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let n = vectors.nrows();
    let sorted_vectors = Mat::from_fn(n, order.len(), |i, j| vectors[(i, order[j])]);
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    HermMatrix::with_spectrum(
        HermMatrix::from_hermitian_unchecked(entries).entries,
        Spectrum { values: sorted_values, vectors: sorted_vectors },
    )
}

fn compute_spectrum(m: MatRef<'_, c64>) -> Result<Spectrum> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Spectrum { values: Vec::new(), vectors: Mat::zeros(0, 0) });
    }
    let evd = m.self_adjoint_eigen(Side::Lower).map_err(|_| Error::EigenFailure)?;
    let values: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
    let mut vectors = evd.U().to_owned();
    for j in 0..n {
        let col_max = (0..n).map(|i| vectors[(i, j)].norm()).fold(0.0, f64::max);
        if let Some(i) = (0..n).find(|&i| vectors[(i, j)].norm() > 1e-8 * col_max) {
            let z = vectors[(i, j)];
            let phase = z.conj() / z.norm();
            for r in 0..n {
                vectors[(r, j)] *= phase;
            }
        }
    }
    Ok(Spectrum { values, vectors })
}
