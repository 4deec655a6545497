//! Positive semidefinite operator-valued kernels over finite products of
//! matrix algebras, their minimal linearisations, induced *-representations
//! and Stinespring dilations of completely positive maps.

pub mod algebra;
pub mod error;
pub mod generators;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod linearisation;
pub mod module;
pub mod scenario;
pub mod semigroup;
pub mod stinespring;

pub use algebra::{AlgebraElement, AlgebraShape, Seminorm};
pub use error::{Error, Result};
pub use kernel::{GramBlock, OperatorKernel, PointFunction};
pub use linearisation::{KVector, Linearisation, Representation, ReproducingSpace};
pub use module::{gramian, AdjointableOp, ModuleMap, ModuleVector};
pub use scenario::{run, Scenario, ScenarioReport, Task, Verdict};
pub use semigroup::{Action, StarSemigroup};
pub use stinespring::{ApproximateUnitNet, CPMapSpec, Dilation};
