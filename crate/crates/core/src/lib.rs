//! Hybrid discontinuous Galerkin discretisation of singularly perturbed
//! convection-diffusion on networks of one-dimensional pipes.

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod mesh;
pub mod network;
pub mod quadrature;
pub mod scheme;
pub mod space;
pub mod timeloop;

pub use error::{Error, Result};
pub use mesh::{build_graded, build_uniform, EdgeMesh, NetworkMesh, Region, Side};
pub use network::{BoundaryData, NetworkProblem, NetworkTopology, TimeProfile, VertexClass};
pub use space::{CoefficientVector, DiscreteSpace};
