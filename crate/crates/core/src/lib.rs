//! Geometric measure of entanglement for pure multi-qudit states.
//!
//! The crate evaluates `G(ψ) = 1 - max_π |<π|ψ>|²` over product states `π`,
//! searches for states and subspaces that maximize it, and post-processes the
//! numerical results by local-unitary canonicalization and marginal analysis.

pub mod analysis;
pub mod ascent;
pub mod canon;
pub mod error;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod refine;
pub mod repro;
pub mod seesaw;
pub mod state;
pub mod subspace;
pub mod zoo;

pub use error::{Error, Result};
pub use state::{PureState, ProductState, SystemShape, C64};
