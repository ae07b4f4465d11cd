//! JSON file formats for states, measures and subalgebra chains, and the
//! fixed numeric formatting used in emitted tables.
//!
//! Complex entries are `[re, im]` pairs and matrices are row-major.

use std::path::Path;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::algebra::{Subalgebra, SubalgebraChain, SubalgebraSpec};
use crate::divergences::{ExtReal, FdState};
use crate::error::{Error, Result};
use crate::gicar::{MeasureSpec, UnitIntervalMeasure};
use crate::linalg::{c64, HermMatrix};

/// `{"blocks": [[[[re, im], …], …], …]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateSpec {
    pub blocks: Vec<Vec<Vec<[f64; 2]>>>,
}

impl TryFrom<StateSpec> for FdState {
    type Error = Error;

    fn try_from(spec: StateSpec) -> Result<Self> {
        let mut blocks = Vec::with_capacity(spec.blocks.len());
        for (b, rows) in spec.blocks.iter().enumerate() {
            let d = rows.len();
            if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
                return Err(Error::Parse(format!("blocks[{b}][{i}] has {} entries, expected {d}", row.len())));
            }
            let m = Mat::from_fn(d, d, |i, j| c64::new(rows[i][j][0], rows[i][j][1]));
            blocks.push(HermMatrix::new(m)?);
        }
        FdState::new(blocks)
    }
}

impl From<&FdState> for StateSpec {
    fn from(state: &FdState) -> Self {
        let blocks = state
            .blocks()
            .iter()
            .map(|b| {
                (0..b.dim())
                    .map(|i| (0..b.dim()).map(|j| [b.get(i, j).re, b.get(i, j).im]).collect())
                    .collect()
            })
            .collect();
        StateSpec { blocks }
    }
}

fn from_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

pub fn parse_state(text: &str) -> Result<FdState> {
    FdState::try_from(from_json::<StateSpec>(text, "state")?)
}

pub fn read_state(path: impl AsRef<Path>) -> Result<FdState> {
    let path = path.as_ref();
    parse_state(&read_text(path)?).map_err(|e| with_path(e, path))
}

/// Entries are written with shortest round-trip precision.
pub fn emit_state(state: &FdState) -> String {
    serde_json::to_string(&StateSpec::from(state)).expect("plain data serializes")
}

pub fn parse_measure(text: &str) -> Result<UnitIntervalMeasure> {
    UnitIntervalMeasure::try_from(from_json::<MeasureSpec>(text, "measure")?)
}

pub fn read_measure(path: impl AsRef<Path>) -> Result<UnitIntervalMeasure> {
    let path = path.as_ref();
    parse_measure(&read_text(path)?).map_err(|e| with_path(e, path))
}

/// A chain is a JSON array of subalgebras, smallest first.
pub fn parse_chain(text: &str) -> Result<SubalgebraChain> {
    let specs: Vec<SubalgebraSpec> = from_json(text, "subalgebra chain")?;
    let links = specs.into_iter().map(Subalgebra::try_from).collect::<Result<Vec<_>>>()?;
    SubalgebraChain::new(links)
}

pub fn read_chain(path: impl AsRef<Path>) -> Result<SubalgebraChain> {
    let path = path.as_ref();
    parse_chain(&read_text(path)?).map_err(|e| with_path(e, path))
}

pub fn emit_chain(chain: &SubalgebraChain) -> String {
    let specs: Vec<SubalgebraSpec> = chain.links().iter().map(SubalgebraSpec::from).collect();
    serde_json::to_string(&specs).expect("plain data serializes")
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    }
}

/// Twelve significant digits, `%g` style, with `inf`, `-inf` and `nan`.
pub fn format_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn format_ext(x: ExtReal) -> String {
    format_num(x.to_f64())
}
