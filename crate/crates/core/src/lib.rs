//! Quasi-static brittle fracture in antiplane shear.
//!
//! Cracks are unions of interior edges of a triangular mesh and grow by
//! incremental minimization of bulk energy, crack length and an L² penalty
//! on the change of displacement. The [`analysis`] module checks the
//! resulting evolutions against minimality, energy balance and Griffith's
//! criterion.

pub mod analysis;
mod error;
pub mod evolution;
pub mod mesh;
pub mod solver;
mod util;

pub use error::{Error, Result};
pub use evolution::{BoundaryProgram, Evolution, EvolutionTrace, Mode, Schedule, StepRecord, TimeProfile};
pub use mesh::{
    build_dofmap, build_rect_mesh, BoundaryTag, CrackSet, DofMap, EdgeId, ExtensionPolicy, Mesh, Point, Side,
};
pub use solver::{EnergyBreakdown, Field, PenaltyWeight, Solver};
