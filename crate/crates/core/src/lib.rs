//! Decide, certify and quantify entanglement of small bipartite and
//! three-qubit states.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense complex matrices, partial trace/transpose, Jacobi eigensolver
//! - [`states`]: validated density matrices and pure states, named and random families
//! - [`separability`]: PPT, reduction and majorization criteria, Schmidt decomposition
//! - [`witness`]: entanglement, Schmidt and GHZ/W witnesses and their optimization
//! - [`distill`]: recurrence distillation and the n-copy distillability test
//! - [`measures`]: entropy of entanglement and upper estimates of E_F and E_R
//! - [`io`]: the plain-text state/witness file format
//!
//! Optimizers with random restarts run them through [`par`], which uses
//! rayon when the `parallel` feature is on.

pub mod distill;
pub mod error;
pub mod io;
pub mod linalg;
pub mod measures;
pub mod par;
pub mod separability;
pub mod states;
pub mod witness;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use par::{Execution, SearchOptions};
pub use states::{DensityMatrix, PureState};
