//! P1 finite elements on `Ω = (−1, 1)²` and the bicriteria optimal control
//! problem for the obstacle problem built on them.

mod assembly;
mod mesh;
mod obstacle;

pub use assembly::{assemble_operators, local_mass, local_stiffness, FemOperators};
pub use mesh::{build_mesh, Mesh};
pub use obstacle::{make_obstacle, ObstacleControlProblem, ObstacleKind, ObstacleState, DEFAULT_WEIGHT};
