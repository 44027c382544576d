//! End-to-end solves and the choice between the convection-diffusion and
//! the pure transport discretisation.

use serde::{Deserialize, Serialize};

use crate::assembly::DiscreteSystem;
use crate::error::{Error, Result};
use crate::mesh::{build_graded, build_uniform, NetworkMesh, Side};
use crate::network::{BoundaryData, NetworkTopology};
use crate::space::{CoefficientVector, DiscreteSpace};
use crate::timeloop::{integrate_system, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshStrategy {
    Uniform,
    Graded,
    Adaptive,
}

impl MeshStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::Graded => "graded",
            Self::Adaptive => "adaptive",
        }
    }
}

impl std::str::FromStr for MeshStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "graded" => Ok(Self::Graded),
            "adaptive" => Ok(Self::Adaptive),
            other => Err(Error::Config(format!("unknown mesh strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Vanishing diffusion on a uniform mesh.
    Transport,
    /// Full convection-diffusion operator.
    Convdiff,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Transport => "transport",
            Self::Convdiff => "convdiff",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub eps: f64,
    pub h: f64,
    pub k: usize,
    pub alpha: f64,
    /// Step size as a multiple of `h`.
    pub tau_ratio: f64,
    pub t_max: f64,
    pub mesh: MeshStrategy,
    /// Bound on algebraic residuals accepted from the direct solver.
    pub solver_tol: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            eps: 1e-2,
            h: 1.0 / 16.0,
            k: 2,
            alpha: 1.0,
            tau_ratio: 0.5,
            t_max: 3.0,
            mesh: MeshStrategy::Graded,
            solver_tol: 1e-10,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        if !(0.0..=1.0).contains(&self.eps) {
            return Err(Error::Config(format!("eps must lie in [0, 1], got {}", self.eps)));
        }
        positive("h", self.h)?;
        positive("alpha", self.alpha)?;
        positive("tau ratio", self.tau_ratio)?;
        positive("t_max", self.t_max)?;
        positive("solver tolerance", self.solver_tol)?;
        if self.k < 1 {
            return Err(Error::Config("polynomial order must be at least 1".into()));
        }
        Ok(())
    }

    pub fn tau(&self) -> f64 {
        self.tau_ratio * self.h
    }

    /// Branch and effective diffusion implied by the mesh strategy.
    pub fn branch(&self) -> Branch {
        match self.mesh {
            _ if self.eps == 0.0 => Branch::Transport,
            MeshStrategy::Adaptive => select_adaptive(self.eps, self.h, self.k),
            MeshStrategy::Uniform | MeshStrategy::Graded => Branch::Convdiff,
        }
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        Self { eps, ..self.clone() }
    }

    pub fn with_h(&self, h: f64) -> Self {
        Self { h, ..self.clone() }
    }
}

/// Transport iff `eps < h^{2k}`, with `h` the target width.
pub fn select_adaptive(eps: f64, h: f64, k: usize) -> Branch {
    if eps < h.powi(2 * k as i32) {
        Branch::Transport
    } else {
        Branch::Convdiff
    }
}

/// A finished solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub branch: Branch,
    /// Diffusion used in the operator (0 on the transport branch).
    pub eps: f64,
    pub tau: f64,
    pub system: DiscreteSystem,
    pub trajectory: Trajectory,
    /// Relative residual of the algebraic rows at the final time.
    pub hybrid_residual: f64,
}

impl Solution {
    pub fn space(&self) -> &DiscreteSpace {
        self.system.space()
    }

    pub fn mesh(&self) -> &NetworkMesh {
        self.system.space().mesh()
    }

    pub fn final_state(&self) -> &CoefficientVector {
        self.trajectory.states.last().expect("trajectory starts at t = 0")
    }

    /// Recorded state closest to `t`.
    pub fn state_at(&self, t: f64) -> Option<&CoefficientVector> {
        let tol = 1e-9 * self.trajectory.times.last().copied().unwrap_or(1.0).max(1.0);
        self.trajectory.find(t, tol).map(|i| &self.trajectory.states[i])
    }
}

/// Builds the mesh the configuration asks for.
pub fn build_mesh(config: &SolveConfig, topology: &NetworkTopology) -> Result<NetworkMesh> {
    match (config.branch(), config.mesh) {
        (Branch::Transport, _) | (_, MeshStrategy::Uniform) => build_uniform(topology, config.h),
        (Branch::Convdiff, _) => build_graded(topology, config.eps, config.h, config.k),
    }
}

/// Assembles and integrates on a given mesh; `stride` thins the record.
pub fn solve_on_mesh(
    mesh: &NetworkMesh,
    topology: &NetworkTopology,
    boundary: &BoundaryData,
    branch: Branch,
    config: &SolveConfig,
    tau: f64,
    stride: usize,
) -> Result<Solution> {
    config.validate()?;
    let eps = match branch {
        Branch::Transport => 0.0,
        Branch::Convdiff => config.eps,
    };
    let space = DiscreteSpace::new(mesh, topology, config.k)?;
    let system = DiscreteSystem::new(space, topology, config.alpha)?;
    let trajectory = integrate_system(&system, eps, boundary, tau, config.t_max, stride)?;
    let (t_end, u_end) = trajectory.last().expect("trajectory starts at t = 0");
    let hybrid_residual =
        system.relative_hybrid_residual(&system.operator(eps), boundary, eps, t_end, u_end.as_slice());
    if hybrid_residual > config.solver_tol {
        return Err(Error::Solver(format!(
            "hybrid residual {hybrid_residual:.3e} exceeds tolerance {:.3e}",
            config.solver_tol
        )));
    }
    Ok(Solution {
        branch,
        eps,
        tau,
        system,
        trajectory,
        hybrid_residual,
    })
}

/// Solves with the branch and mesh implied by `config`.
pub fn solve(config: &SolveConfig, topology: &NetworkTopology, boundary: &BoundaryData) -> Result<Solution> {
    config.validate()?;
    let mesh = build_mesh(config, topology)?;
    solve_on_mesh(&mesh, topology, boundary, config.branch(), config, config.tau(), 1)
}

/// Convection-diffusion solve; requires `eps > 0`.
pub fn solve_convdiff(config: &SolveConfig, topology: &NetworkTopology, boundary: &BoundaryData) -> Result<Solution> {
    config.validate()?;
    if config.eps == 0.0 {
        return Err(Error::Config("the convection-diffusion branch needs eps > 0".into()));
    }
    let mesh = match config.mesh {
        MeshStrategy::Uniform => build_uniform(topology, config.h)?,
        _ => build_graded(topology, config.eps, config.h, config.k)?,
    };
    solve_on_mesh(&mesh, topology, boundary, Branch::Convdiff, config, config.tau(), 1)
}

/// Transport solve on the uniform mesh, ignoring `config.eps`.
pub fn solve_transport(config: &SolveConfig, topology: &NetworkTopology, boundary: &BoundaryData) -> Result<Solution> {
    config.validate()?;
    let mesh = build_uniform(topology, config.h)?;
    solve_on_mesh(&mesh, topology, boundary, Branch::Transport, config, config.tau(), 1)
}

/// Trace of `u` on `edge` at vertex `v` from inside the edge.
pub fn vertex_trace(
    space: &DiscreteSpace,
    topology: &NetworkTopology,
    u: &CoefficientVector,
    edge: usize,
    v: usize,
) -> Result<f64> {
    let e = topology.edge(edge);
    if e.head == v {
        space.evaluate(u, edge, e.length, Side::Left)
    } else if e.tail == v {
        space.evaluate(u, edge, 0.0, Side::Right)
    } else {
        Err(Error::Config(format!(
            "edge {} is not incident to vertex {}",
            e.id,
            topology.vertex_id(v)
        )))
    }
}

/// Largest deviation of the junction hybrids from the flow-weighted
/// average of the incoming traces.
pub fn mixing_rule_residual(space: &DiscreteSpace, topology: &NetworkTopology, u: &CoefficientVector) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for v in topology.interior_vertices() {
        let dof = space.vertex_dof(v).expect("interior vertices carry a hybrid");
        let mut inflow = 0.0;
        for &e in topology.edges_into(v) {
            inflow += topology.edge(e).velocity * vertex_trace(space, topology, u, e, v)?;
        }
        let outflow: f64 = topology
            .edges_out_of(v)
            .iter()
            .map(|&e| topology.edge(e).velocity)
            .sum();
        worst = worst.max((u[dof] - inflow / outflow).abs());
    }
    Ok(worst)
}

/// Layer indicator at one outflow vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerProbe {
    pub vertex: String,
    pub edge: String,
    pub distance: f64,
    pub at_vertex: f64,
    pub upstream: f64,
}

impl LayerProbe {
    pub fn difference(&self) -> f64 {
        self.at_vertex - self.upstream
    }

    /// A layer is reported when the drop exceeds `rel` times the larger of
    /// the two values and the absolute floor `abs`.
    pub fn flags(&self, rel: f64, abs: f64) -> bool {
        let scale = self.at_vertex.abs().max(self.upstream.abs());
        self.difference().abs() > (rel * scale).max(abs)
    }
}

/// Compares the value at each outflow vertex with the value a distance
/// `5 eps (k + 1) / b` upstream. `eps` is a nominal diffusion, so the same
/// probe can be applied to a transport solution.
pub fn layer_probe(
    space: &DiscreteSpace,
    topology: &NetworkTopology,
    u: &CoefficientVector,
    eps: f64,
) -> Result<Vec<LayerProbe>> {
    let k = space.k() as f64;
    let mut out = Vec::new();
    for v in topology.vertices_of_class(crate::network::VertexClass::Outflow) {
        let e = topology.edges_into(v)[0];
        let edge = topology.edge(e);
        let distance = (5.0 * eps * (k + 1.0) / edge.velocity).min(0.5 * edge.length);
        out.push(LayerProbe {
            vertex: topology.vertex_id(v).to_string(),
            edge: edge.id.clone(),
            distance,
            at_vertex: space.evaluate(u, e, edge.length, Side::Left)?,
            upstream: space.evaluate(u, e, edge.length - distance, Side::Left)?,
        });
    }
    Ok(out)
}
