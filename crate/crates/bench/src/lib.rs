//! Inputs shared by the criterion benches.

use trigme::random::haar_random_pure;
use trigme::state::PureState;

/// Haar-random `n`-qubit state with a fixed seed per size.
pub fn qubit_state(n: usize) -> PureState {
    haar_random_pure(&vec![2; n], 1000 + n as u64).expect("valid dims")
}
