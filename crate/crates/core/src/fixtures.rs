//! The two qubit pairs used as reference points throughout the test suites.

use crate::divergences::FdState;
use crate::linalg::{c64, HermMatrix};

/// `ρ = diag(1/2, 1/2)`, `σ = diag(1/3, 2/3)`.
pub fn commuting_pair() -> (FdState, FdState) {
    (
        FdState::diagonal(&[0.5, 0.5]).expect("diagonal state"),
        FdState::diagonal(&[1.0 / 3.0, 2.0 / 3.0]).expect("diagonal state"),
    )
}

/// `ρ = |+⟩⟨+|`, `σ = diag(2/3, 1/3)`.
pub fn noncommuting_pair() -> (FdState, FdState) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = HermMatrix::outer(&[c64::new(h, 0.0), c64::new(h, 0.0)]);
    (
        FdState::from_density(plus).expect("pure state"),
        FdState::diagonal(&[2.0 / 3.0, 1.0 / 3.0]).expect("diagonal state"),
    )
}
