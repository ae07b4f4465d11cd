//! Acceptance suite: eleven criteria at their stated tolerances and time
//! budgets, one PASS/FAIL line each. Runs as a plain binary so the lines are
//! always shown; pass criterion numbers as arguments to run a subset.

use std::time::{Duration, Instant};

use qdiv::algebra::{corner_chain_m4, corner_restrict, martingale_sequence, standard_chain_m4};
use qdiv::divergences::{classical_q, dmax, relative_entropy, sandwiched_d, sandwiched_q, standard_d, standard_q};
use qdiv::fixtures::{commuting_pair, noncommuting_pair};
use qdiv::gicar::{gicar_convergence, gicar_q, UnitIntervalMeasure};
use qdiv::hypothesis::{cutoff_rate, degenerate_check, hoeffding_anti_divergence, sce_sequence};
use qdiv::linalg::{HermMatrix, Projection};
use qdiv::measured::{measured_opt, regularized_estimate, test_measured_opt};
use qdiv::random::{
    apply_channel, random_channel, random_commuting_pair, random_mixed_state, random_nested_pair, random_psd,
    random_state, random_unitary, rng_from_seed,
};
use qdiv::variational::{closed_form_optimizer, objective};
use qdiv::{FdState, Result};
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn finite(x: qdiv::ExtReal) -> f64 {
    x.finite().expect("finite value")
}

fn criterion_1() -> Result<Outcome> {
    let mut rng = rng_from_seed(101);
    let alphas = [0.5, 0.75, 1.5, 2.0, 3.0];
    let (mut worst_opt, mut worst_bound) = (0.0f64, 0.0f64);
    let mut points = 0;
    for i in 0..100 {
        let d = 2 + i % 5;
        let (rank_rho, rank_sigma) = if i % 2 == 0 {
            (d, d)
        } else {
            let rs = rng.random_range(1..=d);
            (rng.random_range(1..=rs), rs)
        };
        let (rho, sigma) = random_nested_pair(d, rank_rho, rank_sigma, &mut rng);
        let exact: Vec<f64> = alphas.iter().map(|&a| finite(sandwiched_q(&rho, &sigma, a).unwrap())).collect();
        for (&a, &q) in alphas.iter().zip(&exact) {
            let x = closed_form_optimizer(&rho, &sigma, a)?.optimizer;
            worst_opt = worst_opt.max(rel(objective(&rho, &sigma, a, &x)?, q));
        }
        for _ in 0..10 {
            let x = random_psd(d, d, &mut rng).scale(10f64.powf(rng.random_range(-1.0..1.0)));
            points += 1;
            for (&a, &q) in alphas.iter().zip(&exact) {
                let v = objective(&rho, &sigma, a, &x)?;
                let violation = if a > 1.0 { v - q } else { q - v };
                worst_bound = worst_bound.max(violation);
            }
        }
    }
    outcome(
        worst_opt <= 1e-8 && worst_bound <= 1e-9,
        format!("optimizer rel err {worst_opt:.2e} (<= 1e-8); worst bound violation over {points} points {worst_bound:.2e} (<= 1e-9)"),
    )
}

fn criterion_2() -> Result<Outcome> {
    let mut rng = rng_from_seed(202);
    let alphas = [0.5, 0.75, 1.5, 2.0, 3.0];
    let (mut worst, mut worst_test) = (0.0f64, 0.0f64);
    for i in 0..20 {
        let d = 2 + i % 3;
        let (rho, sigma, p, q) = random_commuting_pair(d, &mut rng);
        for &a in &alphas {
            let target = finite(classical_q(&p, &q, a)?);
            let from_d = |dv: f64| ((a - 1.0) * dv).exp();
            worst = worst
                .max(rel(finite(sandwiched_q(&rho, &sigma, a)?), target))
                .max(rel(finite(standard_q(&rho, &sigma, a)?), target))
                .max(rel(from_d(measured_opt(&rho, &sigma, a, i as u64)?.0), target));
            if d == 2 {
                worst_test = worst_test.max(rel(from_d(test_measured_opt(&rho, &sigma, a, i as u64)?.0), target));
            }
        }
    }
    let (plus, sig) = noncommuting_pair();
    let strict = finite(standard_d(&plus, &sig, 2.0)?) - finite(sandwiched_d(&plus, &sig, 2.0)?);
    outcome(
        worst <= 1e-10 && worst_test <= 1e-10 && strict >= 0.02,
        format!(
            "sandwiched/standard/measured rel err {worst:.2e}, test-measured (qubits) {worst_test:.2e} (<= 1e-10); standard - sandwiched = {strict:.5} (>= 0.02)"
        ),
    )
}

fn criterion_3() -> Result<Outcome> {
    let mut rng = rng_from_seed(303);
    let ladder = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
    let (mut worst_limit, mut worst_max) = (0.0f64, 0.0f64);
    let mut monotone = true;
    for _ in 0..20 {
        let rho = random_mixed_state(2, 0.5, &mut rng);
        let sigma = random_mixed_state(2, 0.5, &mut rng);
        let d = finite(relative_entropy(&rho, &sigma)?);
        for a in [1.0 - 1e-3, 1.0 + 1e-3] {
            worst_limit = worst_limit.max((finite(sandwiched_d(&rho, &sigma, a)?) - d).abs());
        }
        let values: Vec<f64> = ladder.iter().map(|&a| finite(sandwiched_d(&rho, &sigma, a).unwrap())).collect();
        monotone &= values.windows(2).all(|w| w[1] >= w[0]);
        worst_max = worst_max.max((values[5] - finite(dmax(&rho, &sigma)?)).abs());
    }
    outcome(
        worst_limit <= 1e-2 && worst_max <= 0.02 && monotone,
        format!("|D*_(1±1e-3) - D| {worst_limit:.2e} (<= 1e-2); |D*_64 - Dmax| {worst_max:.4} (<= 0.02); monotone {monotone}"),
    )
}

fn criterion_4() -> Result<Outcome> {
    let mut rng = rng_from_seed(404);
    let (mut worst_step, mut worst_end, mut worst_corner) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..50 {
        let rho = random_state(4, 4, &mut rng);
        let sigma = random_state(4, 4, &mut rng);
        let u = random_unitary(4, &mut rng);
        let chain = if i % 2 == 0 { standard_chain_m4(u.as_ref())? } else { corner_chain_m4(u.as_ref())? };
        for a in [0.5, 2.0] {
            let seq: Vec<f64> = martingale_sequence(&rho, &sigma, &chain, a)?.into_iter().map(finite).collect();
            for w in seq.windows(2) {
                worst_step = worst_step.max(w[0] - w[1]);
            }
            let direct = finite(sandwiched_d(&rho, &sigma, a)?);
            worst_end = worst_end.max((seq[seq.len() - 1] - direct).abs());
        }
    }
    for _ in 0..50 {
        let rho = random_state(4, 4, &mut rng);
        let sigma = random_state(4, 4, &mut rng);
        let v = random_unitary(4, &mut rng);
        let e = Projection::from_orthonormal_columns(v.as_ref().subcols(0, rng.random_range(1..=3)));
        let a = if rng.random::<bool>() { 2.0 } else { 0.7 };
        let lhs = finite(sandwiched_q(&corner_restrict(&rho, &e)?, &corner_restrict(&sigma, &e)?, a)?);
        let ere = FdState::from_density(e.matrix().sandwich(&rho.density())?)?;
        let ese = FdState::from_density(e.matrix().sandwich(&sigma.density())?)?;
        let p = rho.density().trace_product(e.complement().matrix());
        let q = sigma.density().trace_product(e.complement().matrix());
        let rhs = finite(sandwiched_q(&ere, &ese, a)?) + p.powf(a) * q.powf(1.0 - a);
        worst_corner = worst_corner.max(rel(lhs, rhs));
    }
    outcome(
        worst_step <= 1e-10 && worst_end <= 1e-9 && worst_corner <= 1e-10,
        format!(
            "largest decrease along chains {worst_step:.2e} (<= 1e-10); terminal error {worst_end:.2e} (<= 1e-9); corner identity rel err {worst_corner:.2e} (<= 1e-10)"
        ),
    )
}

fn criterion_5() -> Result<Outcome> {
    let (rho, sigma) = commuting_pair();
    let r = 0.25;
    let h = finite(hoeffding_anti_divergence(&rho, &sigma, r)?);
    let ns = [256, 512, 1024, 2048];
    let gaps: Vec<f64> = sce_sequence(&rho, &sigma, r, &ns)?.iter().map(|s| (s - h).abs()).collect();
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    outcome(
        gaps[3] <= 0.02 && decreasing,
        format!("H*_r = {h:.6}; gaps over n = 256..2048: {}", fmt_list(&gaps)),
    )
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn quantum_gaps(r: f64) -> Result<(f64, Vec<f64>)> {
    let (rho, sigma) = noncommuting_pair();
    let h = finite(hoeffding_anti_divergence(&rho, &sigma, r)?);
    let sce = sce_sequence(&rho, &sigma, r, &[2, 4, 6, 8, 10])?;
    Ok((h, sce.iter().map(|s| (s - h).abs()).collect()))
}

/// At r = 0.5 the test |+⟩⟨+|^{⊗n} already has type-II error 2^{−n} < e^{−nr}
/// with type-I error zero, so sce_n = H*_r = 0 for every n and the gaps sit at
/// rounding level: they cannot decrease strictly, and are checked to be
/// nonincreasing within 1e-12. The line after it repeats the trend check at
/// r = 0.78, between D ≈ 0.752 and D_max ≈ 0.811, where the gaps are
/// nontrivial and must decrease strictly.
fn criterion_6() -> Result<Outcome> {
    let (h, gaps) = quantum_gaps(0.5)?;
    let nonincreasing = gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let (h2, gaps2) = quantum_gaps(0.78)?;
    let strict = gaps2.windows(2).all(|w| w[1] < w[0]);
    outcome(
        nonincreasing && gaps[4] <= 0.15 && strict && gaps2[4] <= 0.15,
        format!(
            "r = 0.5: H*_r = {h:.3e}, gaps n = 2..10: {} (nonincreasing, degenerate); r = 0.78: H*_r = {h2:.6}, gaps {} (strictly decreasing)",
            fmt_list(&gaps),
            fmt_list(&gaps2)
        ),
    )
}

/// `ρ = γ σ P` with `P` a random nonempty sum of spectral projections of `σ`.
fn degenerate_pair<R: Rng>(d: usize, rng: &mut R) -> (FdState, FdState) {
    let u = random_unitary(d, rng);
    let mut spectrum: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = spectrum.iter().sum();
    spectrum.iter_mut().for_each(|x| *x /= total);
    let mut keep: Vec<bool> = (0..d).map(|_| rng.random::<bool>()).collect();
    let forced = rng.random_range(0..d);
    keep[forced] = true;
    let mass: f64 = spectrum.iter().zip(&keep).filter(|(_, k)| **k).map(|(x, _)| x).sum();
    let rho_diag: Vec<f64> = spectrum.iter().zip(&keep).map(|(x, k)| if *k { x / mass } else { 0.0 }).collect();
    let rotate = |v: &[f64]| HermMatrix::diagonal(v).congruence(u.as_ref()).expect("square");
    (FdState::from_density(rotate(&rho_diag)).unwrap(), FdState::from_density(rotate(&spectrum)).unwrap())
}

fn criterion_7() -> Result<Outcome> {
    let mut rng = rng_from_seed(707);
    let (mut disagreements, mut misclassified) = (0, 0);
    let mut worst_residual = 0.0f64;
    for i in 0..100 {
        let (rho, sigma) = degenerate_pair(2 + i % 4, &mut rng);
        let rep = degenerate_check(&rho, &sigma)?;
        disagreements += usize::from(!rep.flags_agree());
        misclassified += usize::from(!rep.is_degenerate);
        worst_residual = worst_residual.max(rep.hoeffding_residual.unwrap_or(f64::INFINITY));
    }
    for i in 0..100 {
        let d = 2 + i % 4;
        let rep = degenerate_check(&random_state(d, d, &mut rng), &random_state(d, d, &mut rng))?;
        disagreements += usize::from(!rep.flags_agree());
        misclassified += usize::from(rep.is_degenerate);
    }
    outcome(
        disagreements == 0 && misclassified == 0 && worst_residual <= 1e-8,
        format!(
            "flag disagreements {disagreements}/200; misclassified {misclassified}; worst |H*_r - (r - D)+| {worst_residual:.2e} (<= 1e-8)"
        ),
    )
}

/// Pairs are drawn as mixtures `½G + 1/(2d)`, as in criterion 3: the slack
/// at the best grid point is about `δ²/(2ψ̃'')`, which a 200-point grid over
/// `[0, 2 D_max]` cannot push below 1e-3 when `D_max` is large and `ψ̃` is
/// nearly flat (a few percent of Hilbert–Schmidt random pairs).
fn criterion_8() -> Result<Outcome> {
    let mut rng = rng_from_seed(808);
    let (mut worst_violation, mut worst_slack) = (f64::NEG_INFINITY, 0.0f64);
    for i in 0..20 {
        let d = 2 + i % 3;
        let rho = random_mixed_state(d, 0.5, &mut rng);
        let sigma = random_mixed_state(d, 0.5, &mut rng);
        let dm = finite(dmax(&rho, &sigma)?);
        let grid: Vec<f64> = (0..200).map(|j| 2.0 * dm * j as f64 / 199.0).collect();
        let h: Vec<f64> = grid.iter().map(|&r| finite(hoeffding_anti_divergence(&rho, &sigma, r).unwrap())).collect();
        for kappa in [0.25, 0.5, 0.75] {
            let c = finite(cutoff_rate(&rho, &sigma, kappa)?);
            let slack = grid.iter().zip(&h).map(|(&r, &hr)| hr - kappa * (r - c)).fold(f64::INFINITY, f64::min);
            worst_violation = worst_violation.max(-slack);
            worst_slack = worst_slack.max(slack);
        }
    }
    outcome(
        worst_violation <= 1e-6 && worst_slack <= 1e-3,
        format!("worst violation {worst_violation:.2e} (<= 1e-6); largest grid-minimum slack {worst_slack:.2e} (<= 1e-3)"),
    )
}

fn criterion_9() -> Result<Outcome> {
    let (rho, sigma) = noncommuting_pair();
    let target = finite(sandwiched_d(&rho, &sigma, 2.0)?);
    let est = regularized_estimate(&rho, &sigma, 2.0, 6)?;
    let (g1, g6) = (target - est[0], target - est[5]);
    let below = est.iter().all(|&e| e <= target + 1e-9);
    outcome(
        g6 < g1 && below,
        format!("D*_2 = {target:.6}; estimates {}; gap n=1 {g1:.5}, n=6 {g6:.5}", fmt_list(&est)),
    )
}

fn criterion_10() -> Result<Outcome> {
    let mu1 = UnitIntervalMeasure::atomic(vec![(0.3, 0.5), (0.7, 0.5)])?;
    let mu2 = UnitIntervalMeasure::atomic(vec![(0.3, 0.25), (0.5, 0.5), (0.7, 0.25)])?;
    let ns = [50, 100, 200, 400];
    let points = gicar_convergence(&mu1, &mu2, 2.0, &ns)?;
    let gaps: Vec<f64> = points.iter().map(|p| p.gap).collect();
    let final_err = (finite(points[3].gicar_q) - 2.0).abs();
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let uniform = UnitIntervalMeasure::uniform(1.0)?;
    let mut worst_uniform = 0.0f64;
    for &n in &ns {
        worst_uniform = worst_uniform.max((finite(gicar_q(&uniform, &uniform, n, 2.0)?) - 1.0).abs());
    }
    outcome(
        final_err <= 0.1 && decreasing && worst_uniform <= 1e-12,
        format!("|Q_400 - 2| {final_err:.4} (<= 0.1); gaps {}; uniform |Q_n - 1| {worst_uniform:.2e} (<= 1e-12)", fmt_list(&gaps)),
    )
}

fn criterion_11() -> Result<Outcome> {
    let mut rng = rng_from_seed(1111);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..200 {
        let d_in = 2 + i % 3;
        let d_out = 2 + (i / 3) % 3;
        let rank = rng.random_range(1..=4);
        let rho = random_state(d_in, rng.random_range(1..=d_in), &mut rng);
        let sigma = random_state(d_in, d_in, &mut rng);
        let kraus = random_channel(d_in, d_out, rank, &mut rng);
        let out = |s: &FdState| FdState::from_density(apply_channel(&kraus, &s.density())).unwrap();
        let (r2, s2) = (out(&rho), out(&sigma));
        for a in [0.5, 2.0] {
            let before = sandwiched_d(&rho, &sigma, a)?.to_f64();
            let after = sandwiched_d(&r2, &s2, a)?.to_f64();
            worst = worst.max(after - before);
        }
    }
    outcome(worst <= 1e-9, format!("largest increase {worst:.2e} (<= 1e-9)"))
}

type Criterion = (u32, &'static str, u64, fn() -> Result<Outcome>);

const CRITERIA: [Criterion; 11] = [
    (1, "closed-form vs variational", 30, criterion_1),
    (2, "classical reduction", 5, criterion_2),
    (3, "limit laws", 10, criterion_3),
    (4, "martingale monotonicity", 20, criterion_4),
    (5, "strong converse exponent, classical", 30, criterion_5),
    (6, "strong converse exponent, quantum", 60, criterion_6),
    (7, "degenerate characterization", 20, criterion_7),
    (8, "cutoff rate", 20, criterion_8),
    (9, "measured regularization trend", 60, criterion_9),
    (10, "GICAR convergence", 10, criterion_10),
    (11, "data-processing suite", 20, criterion_11),
];

fn main() {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for (id, name, budget, run) in CRITERIA {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let (passed, detail) = match result {
            Ok(o) => (o.passed && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!passed);
        println!(
            "criterion {id:>2} {}: {name}: {detail} [{:.2} s, budget {budget} s]",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
