//! Three-stage Radau IIA integration of `M u' + K u = l(t)`, `u(0) = 0`.
//!
//! `M` may be singular (the hybrid rows are algebraic). The coupled stage
//! system is factorised once per step size and reused for every step.

use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, Mat};

use crate::assembly::{entries, DiscreteSystem, SparseMatrix};
use crate::error::{Error, Result};
use crate::network::BoundaryData;
use crate::space::CoefficientVector;

#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    pub a: [[f64; 3]; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
}

impl ButcherTableau {
    pub fn stages(&self) -> usize {
        self.c.len()
    }

    pub fn is_stiffly_accurate(&self) -> bool {
        self.a[2] == self.b
    }
}

pub fn radau_tableau() -> ButcherTableau {
    let s6 = 6f64.sqrt();
    let a = [
        [
            11.0 / 45.0 - 7.0 * s6 / 360.0,
            37.0 / 225.0 - 169.0 * s6 / 1800.0,
            -2.0 / 225.0 + s6 / 75.0,
        ],
        [
            37.0 / 225.0 + 169.0 * s6 / 1800.0,
            11.0 / 45.0 + 7.0 * s6 / 360.0,
            -2.0 / 225.0 - s6 / 75.0,
        ],
        [4.0 / 9.0 - s6 / 36.0, 4.0 / 9.0 + s6 / 36.0, 1.0 / 9.0],
    ];
    ButcherTableau {
        a,
        b: a[2],
        c: [(4.0 - s6) / 10.0, (4.0 + s6) / 10.0, 1.0],
    }
}

/// One factorised stage system for a fixed step size.
pub struct Stepper {
    tableau: ButcherTableau,
    mass: Vec<f64>,
    tau: f64,
    lu: Lu<usize, f64>,
}

impl std::fmt::Debug for Stepper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stepper")
            .field("dim", &self.mass.len())
            .field("tau", &self.tau)
            .finish()
    }
}

impl Stepper {
    /// Factorises `I_3 (x) M + tau A (x) K`.
    pub fn new(mass: &[f64], stiffness: &SparseMatrix, tau: f64) -> Result<Self> {
        let n = mass.len();
        if stiffness.nrows() != n || stiffness.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: stiffness.nrows(),
            });
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::TimeGrid(format!("step size must be positive, got {tau}")));
        }
        let tableau = radau_tableau();
        let k = entries(stiffness);
        let mut triplets = Vec::with_capacity(9 * k.len() + 3 * n);
        for i in 0..3 {
            for (r, &m) in mass.iter().enumerate() {
                if m != 0.0 {
                    triplets.push(Triplet::new(i * n + r, i * n + r, m));
                }
            }
            for j in 0..3 {
                let s = tau * tableau.a[i][j];
                for &(r, c, v) in &k {
                    triplets.push(Triplet::new(i * n + r, j * n + c, s * v));
                }
            }
        }
        let stage = SparseColMat::<usize, f64>::try_new_from_triplets(3 * n, 3 * n, &triplets)
            .map_err(|e| Error::Solver(format!("stage matrix: {e:?}")))?;
        let lu = stage
            .sp_lu()
            .map_err(|e| Error::Solver(format!("stage factorisation failed: {e:?}")))?;
        Ok(Self {
            tableau,
            mass: mass.to_vec(),
            tau,
            lu,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Advances `u` from `t` to `t + tau`.
    pub fn step<F>(&self, u: &[f64], t: f64, load: F) -> Result<Vec<f64>>
    where
        F: Fn(f64) -> Vec<f64>,
    {
        let n = self.mass.len();
        if u.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: u.len(),
            });
        }
        let loads: Vec<Vec<f64>> = self
            .tableau
            .c
            .iter()
            .map(|c| load(t + c * self.tau))
            .collect();
        let mut rhs = Mat::<f64>::zeros(3 * n, 1);
        for i in 0..3 {
            for r in 0..n {
                let mut v = self.mass[r] * u[r];
                for (j, l) in loads.iter().enumerate() {
                    v += self.tau * self.tableau.a[i][j] * l[r];
                }
                rhs[(i * n + r, 0)] = v;
            }
        }
        self.lu.solve_in_place_with_conj(Conj::No, rhs.as_mut());
        let next: Vec<f64> = (0..n).map(|r| rhs[(2 * n + r, 0)]).collect();
        if let Some(r) = next.iter().position(|v| !v.is_finite()) {
            return Err(Error::Solver(format!(
                "non-finite stage value in row {r} at t = {t}"
            )));
        }
        Ok(next)
    }
}

/// Step times `0 = t_0 < ... < t_N = t_max`. A step size that divides
/// `t_max` up to rounding gives a uniform grid; otherwise the last step is
/// shortened.
pub fn time_grid(tau: f64, t_max: f64) -> Result<Vec<f64>> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::TimeGrid(format!("step size must be positive, got {tau}")));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::TimeGrid(format!("final time must be positive, got {t_max}")));
    }
    let ratio = t_max / tau;
    let n = ratio.round();
    if (ratio - n).abs() <= 1e-9 * ratio.max(1.0) && n >= 1.0 {
        let n = n as usize;
        return Ok((0..=n).map(|i| t_max * i as f64 / n as f64).collect());
    }
    let full = ratio.floor() as usize;
    let mut grid: Vec<f64> = (0..=full).map(|i| tau * i as f64).collect();
    grid.push(t_max);
    Ok(grid)
}

/// Recorded states of an integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CoefficientVector>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &CoefficientVector)> {
        self.times.last().copied().zip(self.states.last())
    }

    /// Index of the recorded time closest to `t`, if within `tol`.
    pub fn find(&self, t: f64, tol: f64) -> Option<usize> {
        self.times
            .iter()
            .enumerate()
            .map(|(i, s)| (i, (s - t).abs()))
            .filter(|&(_, d)| d <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }
}

/// Integrates from zero initial data, recording every `stride`-th step
/// plus the final state.
pub fn integrate<F>(
    mass: &[f64],
    stiffness: &SparseMatrix,
    load: F,
    tau: f64,
    t_max: f64,
    stride: usize,
) -> Result<Trajectory>
where
    F: Fn(f64) -> Vec<f64>,
{
    let grid = time_grid(tau, t_max)?;
    let stride = stride.max(1);
    let steps = grid.len() - 1;
    let uniform = grid[1] - grid[0];
    let main = Stepper::new(mass, stiffness, uniform)?;
    let last_tau = grid[steps] - grid[steps - 1];
    let tail = if (last_tau - uniform).abs() > 1e-12 * uniform {
        Some(Stepper::new(mass, stiffness, last_tau)?)
    } else {
        None
    };

    let mut u = vec![0.0; mass.len()];
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![CoefficientVector::from_vec(u.clone())],
    };
    for i in 0..steps {
        let stepper = match (&tail, i + 1 == steps) {
            (Some(t), true) => t,
            _ => &main,
        };
        u = stepper.step(&u, grid[i], &load)?;
        if (i + 1) % stride == 0 || i + 1 == steps {
            traj.times.push(grid[i + 1]);
            traj.states.push(CoefficientVector::from_vec(u.clone()));
        }
    }
    Ok(traj)
}

/// Integrates an assembled HDG system for diffusion `eps`.
pub fn integrate_system(
    system: &DiscreteSystem,
    eps: f64,
    boundary: &BoundaryData,
    tau: f64,
    t_max: f64,
    stride: usize,
) -> Result<Trajectory> {
    let k = system.operator(eps);
    integrate(
        system.mass_diagonal(),
        &k,
        |t| system.load(boundary, eps, t),
        tau,
        t_max,
        stride,
    )
}

/// A single step of an assembled HDG system.
pub fn step(
    system: &DiscreteSystem,
    eps: f64,
    boundary: &BoundaryData,
    state: &CoefficientVector,
    t: f64,
    tau: f64,
) -> Result<CoefficientVector> {
    let stepper = Stepper::new(system.mass_diagonal(), &system.operator(eps), tau)?;
    stepper
        .step(state.as_slice(), t, |s| system.load(boundary, eps, s))
        .map(CoefficientVector::from_vec)
}
