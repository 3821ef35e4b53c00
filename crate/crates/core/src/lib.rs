//! Genuine multipartite entanglement of multi-qudit states measured through
//! concurrence triangles.
//!
//! Pure states get the level-averaged triangle measure `F_N`, a cut table and a
//! factorization; mixed states get a purification witness and a convex-roof
//! upper bound.

pub mod campaign;
pub mod channel;
pub mod concurrence;
pub mod cut;
pub mod document;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod mixed;
pub mod random;
pub mod report;
pub mod state;
pub mod structure;
pub mod triangle;

pub use concurrence::{check_polygamy, concurrence_pure, full_cut_table, wootters_concurrence, CutConcurrenceTable, PolygamyReport};
pub use cut::{Cut, PartySet};
pub use error::{GmeError, Result};
pub use mixed::{convex_roof_upper_bound, witness, ConvexRoofConfig, ConvexRoofResult, WitnessOptions, WitnessReport};
pub use state::{AnyState, DensityMatrix, PartialTrace, PureState};
pub use structure::{finest_factorization, Factorization};
pub use triangle::{f_level, f_total, EdgeConvention, GmeOptions, GmeReport};
