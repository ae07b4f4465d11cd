//! Subcommand arguments and the tables they produce.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use qdiv::algebra::martingale_sequence;
use qdiv::divergences::{commute, sandwiched_d, sandwiched_q, standard_d, standard_q};
use qdiv::fixtures::{commuting_pair, noncommuting_pair};
use qdiv::gicar::{classical_renyi_q, gicar_convergence};
use qdiv::hypothesis::{cutoff_rate, experiment_grid, hoeffding_anti_divergence};
use qdiv::io::{read_chain, read_measure, read_state};
use qdiv::measured::{measured_opt_with, regularized_estimate, test_measured_opt, DEFAULT_RESTARTS};
use qdiv::variational::{closed_form_optimizer, iterative_solve};
use qdiv::{Error, FdState, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fixture {
    /// diag(1/2, 1/2) against diag(1/3, 2/3)
    Commuting,
    /// |+⟩⟨+| against diag(2/3, 1/3)
    Noncommuting,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct PairArgs {
    /// JSON file holding ρ
    #[arg(long)]
    pub rho: Option<PathBuf>,
    /// JSON file holding σ
    #[arg(long)]
    pub sigma: Option<PathBuf>,
    /// Use a built-in qubit pair instead of files
    #[arg(long, value_enum, conflicts_with_all = ["rho", "sigma"])]
    pub pair: Option<Fixture>,
}

impl PairArgs {
    fn load(&self, fallback: Option<Fixture>) -> Result<(FdState, FdState)> {
        match (&self.rho, &self.sigma, self.pair.or(fallback)) {
            (Some(r), Some(s), _) => Ok((read_state(r)?, read_state(s)?)),
            (None, None, Some(Fixture::Commuting)) => Ok(commuting_pair()),
            (None, None, Some(Fixture::Noncommuting)) => Ok(noncommuting_pair()),
            _ => Err(Error::InvalidArgument("give both --rho and --sigma, or --pair".into())),
        }
    }
}

fn grid(values: &[f64], flag: &str) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument(format!("--{flag} needs at least one value")));
    }
    if let Some(x) = values.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!("--{flag} value {x} is not finite")));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok(v)
}

fn n_grid(values: &[usize], flag: &str) -> Result<Vec<usize>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument(format!("--{flag} needs at least one value")));
    }
    if values.contains(&0) {
        return Err(Error::InvalidArgument(format!("--{flag} values must be >= 1")));
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

/// Evaluates `f` on every grid point in parallel, keeping grid order.
fn rows_over<T: Sync, F>(points: &[T], f: F) -> Result<Vec<Vec<Cell>>>
where
    F: Fn(&T) -> Result<Vec<Vec<Cell>>> + Sync + Send,
{
    let chunks: Vec<Vec<Vec<Cell>>> = points.par_iter().map(f).collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

fn table(header: Vec<&'static str>, rows: Vec<Vec<Cell>>) -> Table {
    let mut t = Table::new(header);
    rows.into_iter().for_each(|r| t.push(r));
    t
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct DivArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub pair: PairArgs,
    /// Rényi orders, comma separated
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
}

pub fn div(args: &DivArgs) -> Result<Table> {
    let (rho, sigma) = args.pair.load(None)?;
    let alphas = grid(&args.alpha, "alpha")?;
    let rows = rows_over(&alphas, |&a| {
        Ok(vec![vec![
            a.into(),
            sandwiched_q(&rho, &sigma, a)?.into(),
            sandwiched_d(&rho, &sigma, a)?.into(),
            standard_q(&rho, &sigma, a)?.into(),
            standard_d(&rho, &sigma, a)?.into(),
        ]])
    })?;
    Ok(table(vec!["alpha", "q_sandwiched", "d_sandwiched", "q_standard", "d_standard"], rows))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct VariationalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub pair: PairArgs,
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    /// Iteration cap of the numerical solver [default: 500]
    #[arg(long)]
    pub iters: Option<usize>,
    /// Seed of the solver's starting point [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn variational(args: &VariationalArgs) -> Result<Table> {
    let (rho, sigma) = args.pair.load(None)?;
    let alphas = grid(&args.alpha, "alpha")?;
    let (iters, seed) = (args.iters.unwrap_or(500), args.seed.unwrap_or(0));
    let rows = rows_over(&alphas, |&a| {
        let closed = closed_form_optimizer(&rho, &sigma, a)?;
        let solved = iterative_solve(&rho, &sigma, a, iters, seed)?;
        Ok(vec![vec![
            a.into(),
            closed.value.into(),
            solved.value.into(),
            sandwiched_q(&rho, &sigma, a)?.into(),
            solved.iterations.into(),
            solved.converged.into(),
        ]])
    })?;
    Ok(table(vec!["alpha", "closed_form", "iterative", "q_sandwiched", "iterations", "converged"], rows))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct MartingaleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub pair: PairArgs,
    /// JSON file holding the subalgebra chain, smallest first
    #[arg(long)]
    pub chain: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
}

pub fn martingale(args: &MartingaleArgs) -> Result<Table> {
    let (rho, sigma) = args.pair.load(None)?;
    let path = args.chain.as_ref().ok_or_else(|| Error::InvalidArgument("--chain is required".into()))?;
    let chain = read_chain(path)?;
    let alphas = grid(&args.alpha, "alpha")?;
    let rows = rows_over(&alphas, |&a| {
        let seq = martingale_sequence(&rho, &sigma, &chain, a)?;
        Ok(seq
            .into_iter()
            .zip(chain.links())
            .enumerate()
            .map(|(i, (d, link))| {
                let algebra_dim: usize = link.pattern().iter().map(|&(m, _)| m * m).sum();
                vec![a.into(), (i + 1).into(), algebra_dim.into(), d.into()]
            })
            .collect())
    })?;
    Ok(table(vec!["alpha", "link", "algebra_dim", "d_sandwiched"], rows))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub pair: PairArgs,
    /// Type-II rates, comma separated
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<f64>,
    /// Use n = 1, 2, 4, … up to this value
    #[arg(long, conflicts_with = "nlist")]
    pub nmax: Option<usize>,
    /// Explicit list of n, comma separated
    #[arg(long, value_delimiter = ',')]
    pub nlist: Vec<usize>,
    /// Require a commuting pair (defaults to the built-in commuting pair)
    #[arg(long)]
    pub classical: bool,
}

/// `1, 2, 4, …` up to `nmax`, with `nmax` itself appended if it is not a
/// power of two.
pub fn doubling(nmax: usize) -> Vec<usize> {
    let mut v: Vec<usize> = std::iter::successors(Some(1usize), |n| n.checked_mul(2)).take_while(|&n| n <= nmax).collect();
    if v.last() != Some(&nmax) && nmax > 0 {
        v.push(nmax);
    }
    v
}

pub fn sce(args: &SceArgs) -> Result<Table> {
    let (rho, sigma) = args.pair.load(args.classical.then_some(Fixture::Commuting))?;
    if args.classical && !commute(&rho, &sigma)? {
        return Err(Error::InvalidArgument("--classical needs a commuting pair".into()));
    }
    let rs = grid(&args.r, "r")?;
    let ns = match args.nmax {
        Some(nmax) if args.nlist.is_empty() => n_grid(&doubling(nmax), "nmax")?,
        _ => n_grid(&args.nlist, "nlist")?,
    };
    let rows = rows_over(&rs, |&r| {
        Ok(experiment_grid(&rho, &sigma, &[r], &ns)?
            .into_iter()
            .map(|row| {
                vec![row.n.into(), row.r.into(), row.alpha_star.into(), row.sce_value.into(), row.hoeffding_value.into()]
            })
            .collect())
    })?;
    Ok(table(vec!["n", "r", "alpha_star", "sce_value", "hoeffding_value"], rows))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct HoeffdingArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub pair: PairArgs,
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<f64>,
}

pub fn hoeffding(args: &HoeffdingArgs) -> Result<Table> {
    let (rho, sigma) = args.pair.load(None)?;
    let rs = grid(&args.r, "r")?;
    let rows = rows_over(&rs, |&r| Ok(vec![vec![r.into(), hoeffding_anti_divergence(&rho, &sigma, r)?.into()]]))?;
    Ok(table(vec!["r", "hoeffding_value"], rows))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct CutoffArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub pair: PairArgs,
    /// Slopes in (0, 1), comma separated
    #[arg(long, value_delimiter = ',')]
    pub kappa: Vec<f64>,
}

pub fn cutoff(args: &CutoffArgs) -> Result<Table> {
    let (rho, sigma) = args.pair.load(None)?;
    let ks = grid(&args.kappa, "kappa")?;
    let rows = rows_over(&ks, |&k| {
        Ok(vec![vec![k.into(), (1.0 / (1.0 - k)).into(), cutoff_rate(&rho, &sigma, k)?.into()]])
    })?;
    Ok(table(vec!["kappa", "alpha", "cutoff_rate"], rows))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct MeasuredArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub pair: PairArgs,
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    /// Seed of the random restarts [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of random restarts [default: 16]
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Report (1/n) D^M_α on n copies for n = 1..N instead
    #[arg(long, value_name = "N")]
    pub regularize: Option<usize>,
}

pub fn measured(args: &MeasuredArgs) -> Result<Table> {
    let (rho, sigma) = args.pair.load(None)?;
    let alphas = grid(&args.alpha, "alpha")?;
    if let Some(n_max) = args.regularize {
        let rows = rows_over(&alphas, |&a| {
            let target = sandwiched_d(&rho, &sigma, a)?;
            Ok(regularized_estimate(&rho, &sigma, a, n_max)?
                .into_iter()
                .enumerate()
                .map(|(i, v)| vec![a.into(), (i + 1).into(), v.into(), target.into()])
                .collect())
        })?;
        return Ok(table(vec!["alpha", "n", "regularized", "d_sandwiched"], rows));
    }
    let seed = args.seed.unwrap_or(0);
    let restarts = args.restarts.unwrap_or(DEFAULT_RESTARTS);
    let rows = rows_over(&alphas, |&a| {
        let (m, _) = measured_opt_with(&rho, &sigma, a, seed, restarts)?;
        let (t, _) = test_measured_opt(&rho, &sigma, a, seed)?;
        Ok(vec![vec![a.into(), m.into(), t.into(), sandwiched_d(&rho, &sigma, a)?.into()]])
    })?;
    Ok(table(vec!["alpha", "measured", "test_measured", "d_sandwiched"], rows))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct GicarArgs {
    /// JSON file holding the first measure on [0, 1]
    #[arg(long)]
    pub mu1: Option<PathBuf>,
    /// JSON file holding the second measure on [0, 1]
    #[arg(long)]
    pub mu2: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Levels n, comma separated
    #[arg(long, value_delimiter = ',')]
    pub nlist: Vec<usize>,
}

pub fn gicar(args: &GicarArgs) -> Result<Table> {
    let missing = |flag: &str| Error::InvalidArgument(format!("--{flag} is required"));
    let mu1 = read_measure(args.mu1.as_ref().ok_or_else(|| missing("mu1"))?)?;
    let mu2 = read_measure(args.mu2.as_ref().ok_or_else(|| missing("mu2"))?)?;
    let alpha = args.alpha.ok_or_else(|| missing("alpha"))?;
    let ns = n_grid(&args.nlist, "nlist")?;
    let target = classical_renyi_q(&mu1, &mu2, alpha)?;
    let rows = rows_over(&ns, |&n| {
        Ok(gicar_convergence(&mu1, &mu2, alpha, &[n])?
            .into_iter()
            .map(|p| vec![p.n.into(), p.gicar_q.into(), target.into(), p.gap.into()])
            .collect())
    })?;
    Ok(table(vec!["n", "gicar_q", "classical_q", "gap"], rows))
}
