//! Shared setup for the solver benchmarks.

use hdgnet::assembly::DiscreteSystem;
use hdgnet::network::{fixtures, NetworkProblem};
use hdgnet::scheme::{build_mesh, SolveConfig};
use hdgnet::DiscreteSpace;

pub fn problem(name: &str) -> NetworkProblem {
    fixtures::load(name).expect("bundled fixture")
}

/// Graded-mesh configuration with a short horizon.
pub fn config(eps: f64, h: f64, k: usize) -> SolveConfig {
    SolveConfig {
        eps,
        h,
        k,
        t_max: 0.5,
        ..SolveConfig::default()
    }
}

pub fn space(problem: &NetworkProblem, config: &SolveConfig) -> DiscreteSpace {
    let mesh = build_mesh(config, &problem.topology).expect("valid mesh parameters");
    DiscreteSpace::new(&mesh, &problem.topology, config.k).expect("valid space")
}

pub fn system(problem: &NetworkProblem, config: &SolveConfig) -> DiscreteSystem {
    DiscreteSystem::new(space(problem, config), &problem.topology, config.alpha).expect("valid system")
}
