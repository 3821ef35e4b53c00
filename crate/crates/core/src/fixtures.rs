//! Shipped example states, embedded at compile time.

use crate::document::parse_state;
use crate::error::{GmeError, Result};
use crate::state::{AnyState, DensityMatrix, PureState};

pub const APPENDIX_C: &str = include_str!("../../../fixtures/appendix_c.json");
pub const APPENDIX_E: &str = include_str!("../../../fixtures/appendix_e.json");
pub const GHZ4: &str = include_str!("../../../fixtures/ghz4.json");
pub const W4: &str = include_str!("../../../fixtures/w4.json");

/// Load tolerance for the transcribed matrices, which carry ~6 significant digits.
pub const FIXTURE_TOL: f64 = 1e-6;

fn mixed(text: &str) -> Result<DensityMatrix> {
    match parse_state(text, FIXTURE_TOL)? {
        AnyState::Mixed(rho) => Ok(rho),
        AnyState::Pure(_) => Err(GmeError::Parse("expected a mixed-state fixture".into())),
    }
}

fn pure(text: &str) -> Result<PureState> {
    match parse_state(text, FIXTURE_TOL)? {
        AnyState::Pure(psi) => Ok(psi),
        AnyState::Mixed(_) => Err(GmeError::Parse("expected a pure-state fixture".into())),
    }
}

/// Four-qubit projector, numerically rank 1, factoring as `{1} {2} {3,4}`.
pub fn appendix_c() -> DensityMatrix {
    mixed(APPENDIX_C).expect("embedded fixture is valid")
}

/// Three-qubit state with spectrum `{3/4, 1/4}`.
pub fn appendix_e() -> DensityMatrix {
    mixed(APPENDIX_E).expect("embedded fixture is valid")
}

pub fn ghz4() -> PureState {
    pure(GHZ4).expect("embedded fixture is valid")
}

pub fn w4() -> PureState {
    pure(W4).expect("embedded fixture is valid")
}
