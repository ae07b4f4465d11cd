//! Seeded random instances: Hermitian matrices, densities, unitaries, channels.
//!
//! Everything takes an explicit RNG so experiments are reproducible.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::divergences::FdState;
use crate::linalg::{c64, exp_i, HermMatrix};

pub type LabRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> c64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex Ginibre matrix with unit-variance entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat<c64> {
    Mat::from_fn(rows, cols, |_, _| gaussian_c64(rng))
}

/// Hermitian matrix from the Gaussian unitary ensemble (unnormalized).
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermMatrix {
    let g = ginibre(dim, dim, rng);
    HermMatrix::from_hermitian_unchecked(&g + g.adjoint())
}

/// PSD matrix `G G†` of the requested rank.
pub fn random_psd<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> HermMatrix {
    let g = ginibre(dim, rank, rng);
    HermMatrix::from_hermitian_unchecked(&g * g.adjoint())
}

/// Trace-one density of the requested rank.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> HermMatrix {
    let p = random_psd(dim, rank, rng);
    let t = p.trace();
    p.scale(1.0 / t)
}

pub fn random_state<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> FdState {
    FdState::from_density(random_density(dim, rank, rng)).expect("random density is PSD")
}

/// Haar-ish unitary `exp(iH)` with `H` from the Gaussian ensemble.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Mat<c64> {
    let h = random_hermitian(dim, rng).scale(3.0);
    exp_i(&h).expect("Hermitian eigendecomposition")
}

/// Probability vector with strictly positive entries.
pub fn random_probability<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// A commuting pair of full-rank states diagonal in a shared random basis.
pub fn random_commuting_pair<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> (FdState, FdState, Vec<f64>, Vec<f64>) {
    let u = random_unitary(dim, rng);
    let p = random_probability(dim, rng);
    let q = random_probability(dim, rng);
    let rho = HermMatrix::diagonal(&p).congruence(u.as_ref()).expect("square");
    let sigma = HermMatrix::diagonal(&q).congruence(u.as_ref()).expect("square");
    (
        FdState::from_density(rho).expect("PSD"),
        FdState::from_density(sigma).expect("PSD"),
        p,
        q,
    )
}

/// Kraus operators `K_i` (each `d_out × d_in`) of a random channel with
/// `Σ K_i† K_i = 1`. The count is raised to `⌈d_in / d_out⌉` when needed, since
/// fewer operators cannot be trace preserving.
pub fn random_channel<R: Rng + ?Sized>(d_in: usize, d_out: usize, kraus_rank: usize, rng: &mut R) -> Vec<Mat<c64>> {
    let kraus_rank = kraus_rank.max(d_in.div_ceil(d_out));
    let stacked = ginibre(kraus_rank * d_out, d_in, rng);
    let gram = HermMatrix::from_hermitian_unchecked(stacked.adjoint() * &stacked);
    let inv_sqrt = gram.power(-0.5).expect("Gram matrix is PSD");
    let normalized = &stacked * inv_sqrt.as_mat();
    (0..kraus_rank)
        .map(|k| normalized.as_ref().subrows(k * d_out, d_out).to_owned())
        .collect()
}

/// Apply a channel given by Kraus operators.
pub fn apply_channel(kraus: &[Mat<c64>], rho: &HermMatrix) -> HermMatrix {
    let d_out = kraus[0].nrows();
    let mut acc = Mat::<c64>::zeros(d_out, d_out);
    for k in kraus {
        acc += k * rho.as_mat() * k.adjoint();
    }
    HermMatrix::from_hermitian_unchecked(acc)
}

/// `(1 − η)·G + η·1/d` with `G` a full-rank random density: every eigenvalue
/// is at least `η/d`.
pub fn random_mixed_state<R: Rng + ?Sized>(dim: usize, eta: f64, rng: &mut R) -> FdState {
    let g = random_density(dim, dim, rng).scale(1.0 - eta);
    let floor = HermMatrix::identity(dim).scale(eta / dim as f64);
    FdState::from_density(g.add(&floor).expect("same dimension")).expect("mixture of states is PSD")
}

/// A state pair with `rank ρ = rank_rho ≤ rank σ = rank_sigma` and
/// `s(ρ) ≤ s(σ)`. `ρ` is supported on the first `rank_rho` coordinates, so its
/// kernel is exactly representable; `σ` is a generic dense matrix whose range
/// contains those coordinates. By unitary invariance this loses no generality.
pub fn random_nested_pair<R: Rng + ?Sized>(
    dim: usize,
    rank_rho: usize,
    rank_sigma: usize,
    rng: &mut R,
) -> (FdState, FdState) {
    assert!(1 <= rank_rho && rank_rho <= rank_sigma && rank_sigma <= dim);
    let extra = ginibre(dim, rank_sigma - rank_rho, rng);
    let span = Mat::from_fn(dim, rank_sigma, |i, j| {
        if j < rank_rho {
            if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) }
        } else {
            extra[(i, j - rank_rho)]
        }
    });
    let w = &span * ginibre(rank_sigma, rank_sigma, rng);
    let sigma = HermMatrix::from_hermitian_unchecked(&w * w.adjoint());
    let g = ginibre(rank_rho, rank_rho, rng);
    let gg = &g * g.adjoint();
    let rho = HermMatrix::from_hermitian_unchecked(Mat::from_fn(dim, dim, |i, j| {
        if i < rank_rho && j < rank_rho { gg[(i, j)] } else { c64::new(0.0, 0.0) }
    }));
    let (tr, ts) = (rho.trace(), sigma.trace());
    (
        FdState::from_density(rho.scale(1.0 / tr)).expect("PSD"),
        FdState::from_density(sigma.scale(1.0 / ts)).expect("PSD"),
    )
}
