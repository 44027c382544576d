//! Reference solutions, discrete errors, convergence tables and monitors.
//!
//! There are no closed-form solutions on networks, so every rate reported
//! here is a self-convergence rate against a refined discrete reference.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::{mesh_stats, NetworkMesh, Region};
use crate::network::{BoundaryData, NetworkTopology};
use crate::quadrature::GaussLegendre;
use crate::scheme::{build_mesh, solve_on_mesh, Branch, SolveConfig, Solution};
use crate::space::{CoefficientVector, DiscreteSpace};

/// Time-matching tolerance relative to the final time.
const TIME_TOL: f64 = 1e-9;

/// Solves on the twice bisected mesh with a quarter of the step, recording
/// only the times shared with the computational grid.
pub fn compute_reference(
    config: &SolveConfig,
    topology: &NetworkTopology,
    boundary: &BoundaryData,
) -> Result<Solution> {
    config.validate()?;
    let mesh = build_mesh(config, topology)?.refine_uniformly().refine_uniformly();
    solve_on_mesh(&mesh, topology, boundary, config.branch(), config, config.tau() / 4.0, 4)
}

fn shared_times(coarse: &Solution, fine: &Solution) -> Vec<(usize, usize)> {
    let t_max = coarse.trajectory.times.last().copied().unwrap_or(1.0).max(1.0);
    coarse
        .trajectory
        .times
        .iter()
        .enumerate()
        .filter_map(|(i, &t)| fine.trajectory.find(t, TIME_TOL * t_max).map(|j| (i, j)))
        .collect()
}

/// `max_t || u_ref - I_ref u ||_{L2}` over the shared grid times, with the
/// coarse state represented exactly on the nested reference space.
pub fn error_ref(run: &Solution, reference: &Solution) -> Result<f64> {
    let pairs = shared_times(run, reference);
    if pairs.is_empty() {
        return Err(Error::NotNested("no shared grid times".into()));
    }
    let (coarse, fine) = (run.space(), reference.space());
    let mut worst: f64 = 0.0;
    for (i, j) in pairs {
        let lifted = coarse.interpolate_to_refined(&run.trajectory.states[i], fine)?;
        let diff = reference.trajectory.states[j].axpy(-1.0, &lifted);
        worst = worst.max(fine.l2_norm(&diff));
    }
    Ok(worst)
}

/// L2 distance between two discrete functions on arbitrary meshes of the
/// same network, integrated exactly on the merged breakpoints.
pub fn l2_distance(a: &DiscreteSpace, u: &CoefficientVector, b: &DiscreteSpace, v: &CoefficientVector) -> Result<f64> {
    a.check(u)?;
    b.check(v)?;
    if a.mesh().edges().len() != b.mesh().edges().len() {
        return Err(Error::Config("spaces live on different networks".into()));
    }
    let rule = GaussLegendre::new(a.k().max(b.k()) + 1);
    let mut sum = 0.0;
    for e in 0..a.mesh().edges().len() {
        for (x0, x1) in merged_intervals(a.mesh(), b.mesh(), e) {
            let mid = 0.5 * (x0 + x1);
            let ea = a.locate(e, mid, crate::mesh::Side::Right)?;
            let eb = b.locate(e, mid, crate::mesh::Side::Right)?;
            for (x, w) in rule.on_interval(x0, x1) {
                let d = a.eval_element(u, ea, x) - b.eval_element(v, eb, x);
                sum += w * d * d;
            }
        }
    }
    Ok(sum.sqrt())
}

fn merged_intervals(a: &NetworkMesh, b: &NetworkMesh, e: usize) -> Vec<(f64, f64)> {
    let mut points: Vec<f64> = a
        .edge(e)
        .breakpoints()
        .iter()
        .chain(b.edge(e).breakpoints())
        .copied()
        .collect();
    points.sort_by(f64::total_cmp);
    let tol = 1e-14 * a.edge(e).length().max(1.0);
    points.dedup_by(|x, y| (*x - *y).abs() <= tol);
    points.windows(2).map(|w| (w[0], w[1])).collect()
}

/// `max_t` of the merged-mesh L2 distance over the shared grid times.
pub fn trajectory_distance(a: &Solution, b: &Solution) -> Result<f64> {
    let pairs = shared_times(a, b);
    if pairs.is_empty() {
        return Err(Error::TimeGrid("no shared grid times".into()));
    }
    pairs.into_iter().try_fold(0.0f64, |m, (i, j)| {
        let d = l2_distance(a.space(), &a.trajectory.states[i], b.space(), &b.trajectory.states[j])?;
        Ok(m.max(d))
    })
}

/// `log2(e(h) / e(h/2))` for each adjacent pair.
pub fn eoc(errors: &[f64], hs: &[f64]) -> Result<Vec<f64>> {
    if errors.len() != hs.len() {
        return Err(Error::LengthMismatch(format!(
            "{} errors for {} mesh widths",
            errors.len(),
            hs.len()
        )));
    }
    for w in hs.windows(2) {
        if (w[0] / w[1] - 2.0).abs() > 1e-9 {
            return Err(Error::Config(format!("mesh widths {} and {} are not a halving", w[0], w[1])));
        }
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapEntry {
    pub eps: f64,
    pub gap: f64,
    /// `gap(previous eps) / gap(eps)`.
    pub ratio: Option<f64>,
}

/// Distance between convection-diffusion and transport solutions for a
/// list of diffusion values. Both use `fine`'s width, order and step.
pub fn asymptotic_gap(
    topology: &NetworkTopology,
    boundary: &BoundaryData,
    eps_list: &[f64],
    fine: &SolveConfig,
) -> Result<Vec<GapEntry>> {
    let transport_mesh = crate::mesh::build_uniform(topology, fine.h)?;
    let transport = solve_on_mesh(&transport_mesh, topology, boundary, Branch::Transport, fine, fine.tau(), 1)?;
    let gaps: Vec<Result<f64>> = eps_list
        .par_iter()
        .map(|&eps| {
            if eps <= 0.0 {
                return Err(Error::Config(format!("gap study needs eps > 0, got {eps}")));
            }
            let config = fine.with_eps(eps);
            let mesh = crate::mesh::build_graded(topology, eps, fine.h, fine.k)?;
            let cd = solve_on_mesh(&mesh, topology, boundary, Branch::Convdiff, &config, fine.tau(), 1)?;
            trajectory_distance(&cd, &transport)
        })
        .collect();
    let mut out: Vec<GapEntry> = Vec::with_capacity(eps_list.len());
    for (&eps, gap) in eps_list.iter().zip(gaps) {
        let gap = gap?;
        let ratio = out.last().map(|prev| prev.gap / gap);
        out.push(GapEntry { eps, gap, ratio });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Overshoot {
    pub min: f64,
    pub max: f64,
    pub data_min: f64,
    pub data_max: f64,
    /// Excursion beyond the data range relative to its magnitude.
    pub relative: f64,
    pub flagged: bool,
}

/// Space-time extrema of the bulk solution, sampled at element ends and
/// Gauss points, against the range of the boundary data.
pub fn max_principle_monitor(solution: &Solution, boundary: &BoundaryData, tolerance: f64) -> Overshoot {
    let space = solution.space();
    let t_max = solution.trajectory.times.last().copied().unwrap_or(0.0);
    let (mut data_min, mut data_max) = boundary.range(t_max);
    // zero initial data belongs to the admissible range
    data_min = data_min.min(0.0);
    data_max = data_max.max(0.0);
    let rule = GaussLegendre::new(space.k() + 1);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for u in &solution.trajectory.states {
        for (i, el) in space.elements().iter().enumerate() {
            let points = [el.x0, el.x1]
                .into_iter()
                .chain(rule.on_interval(el.x0, el.x1).map(|(x, _)| x));
            for x in points {
                let v = space.eval_element(u, i, x);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    let scale = data_max.abs().max(data_min.abs());
    let excess = (hi - data_max).max(data_min - lo).max(0.0);
    let relative = if scale > 0.0 { excess / scale } else { excess };
    Overshoot {
        min: lo,
        max: hi,
        data_min,
        data_max,
        relative,
        flagged: relative > tolerance,
    }
}

/// One line of the error report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub branch: Branch,
    pub k: usize,
    pub alpha: f64,
    pub eps: f64,
    pub h: f64,
    pub tau: f64,
    pub elements: usize,
    pub layer_elements: usize,
    pub error: f64,
    /// Rate against the previous row with the same `eps`.
    pub eoc: Option<f64>,
}

pub const REPORT_HEADER: &str = "branch,k,alpha,epsilon,h,tau,N_elements,N_layer,error,eoc";

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.branch.as_str(),
            r.k,
            float(r.alpha),
            float(r.eps),
            float(r.h),
            float(r.tau),
            r.elements,
            r.layer_elements,
            float(r.error),
            r.eoc.map(float).unwrap_or_default()
        );
    }
    out
}

/// `(epsilon, h, error)` series for plotting.
pub fn plot_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("epsilon,h,error\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", float(r.eps), float(r.h), float(r.error));
    }
    out
}

/// A computed run together with its report row.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub row: ReportRow,
    pub run: Solution,
}

/// Solves one configuration and its reference and measures the error.
pub fn measure_with_run(
    config: &SolveConfig,
    topology: &NetworkTopology,
    boundary: &BoundaryData,
) -> Result<Measurement> {
    config.validate()?;
    let mesh = build_mesh(config, topology)?;
    let branch = config.branch();
    let run = solve_on_mesh(&mesh, topology, boundary, branch, config, config.tau(), 1)?;
    let reference = compute_reference(config, topology, boundary)?;
    let error = error_ref(&run, &reference)?;
    let layer_elements = mesh
        .edges()
        .iter()
        .map(|m| m.count(Region::Layer))
        .sum();
    let row = ReportRow {
        branch,
        k: config.k,
        alpha: config.alpha,
        eps: config.eps,
        h: config.h,
        tau: config.tau(),
        elements: mesh.element_count(),
        layer_elements,
        error,
        eoc: None,
    };
    Ok(Measurement { row, run })
}

/// Run and reference for one configuration, reduced to a report row.
pub fn measure(config: &SolveConfig, topology: &NetworkTopology, boundary: &BoundaryData) -> Result<ReportRow> {
    measure_with_run(config, topology, boundary).map(|m| m.row)
}

/// Outcome of one sweep point; failures do not stop the sweep.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub config: SolveConfig,
    pub outcome: std::result::Result<ReportRow, String>,
}

/// `(eps, h)` combinations in sweep order: eps outer, h inner.
pub fn sweep_configs(base: &SolveConfig, eps_list: &[f64], hs: &[f64]) -> Vec<SolveConfig> {
    eps_list
        .iter()
        .flat_map(|&eps| hs.iter().map(move |&h| base.with_eps(eps).with_h(h)))
        .collect()
}

/// Fills in the rate of each successful entry whose predecessor has the
/// same `eps`, twice the `h` and also succeeded.
pub fn fill_rates(entries: &mut [SweepEntry]) {
    for i in 1..entries.len() {
        let (prev, cur) = entries.split_at_mut(i);
        let (p, c) = (&prev[i - 1], &mut cur[0]);
        if p.config.eps != c.config.eps || (p.config.h / c.config.h - 2.0).abs() > 1e-9 {
            continue;
        }
        if let (Ok(a), Ok(b)) = (&p.outcome, &mut c.outcome) {
            b.eoc = Some((a.error / b.error).log2());
        }
    }
}

/// Runs every `(eps, h)` combination in parallel and returns entries in
/// sweep order, with rates filled in per `eps`.
pub fn sweep(
    base: &SolveConfig,
    topology: &NetworkTopology,
    boundary: &BoundaryData,
    eps_list: &[f64],
    hs: &[f64],
) -> Vec<SweepEntry> {
    let mut entries: Vec<SweepEntry> = sweep_configs(base, eps_list, hs)
        .into_par_iter()
        .map(|config| {
            let outcome = measure(&config, topology, boundary).map_err(|e| e.to_string());
            SweepEntry { config, outcome }
        })
        .collect();
    fill_rates(&mut entries);
    entries
}

/// Layer statistics for a configuration's mesh.
pub fn mesh_report(config: &SolveConfig, topology: &NetworkTopology) -> Result<crate::mesh::MeshStats> {
    let mesh = build_mesh(config, topology)?;
    Ok(mesh_stats(&mesh, topology, config.eps, config.k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{fixtures, TimeProfile};
    use crate::scheme::solve;

    fn pipe_config(h: f64) -> SolveConfig {
        SolveConfig {
            eps: 1e-2,
            h,
            t_max: 1.0,
            ..SolveConfig::default()
        }
    }

    #[test]
    fn eoc_examples() {
        assert_eq!(eoc(&[1.0, 0.125], &[0.5, 0.25]).unwrap(), vec![3.0]);
        assert_eq!(eoc(&[1.0, 0.25], &[0.5, 0.25]).unwrap(), vec![2.0]);
        assert_eq!(eoc(&[0.3, 0.3], &[0.5, 0.25]).unwrap(), vec![0.0]);
        assert!(matches!(eoc(&[1.0], &[0.5, 0.25]), Err(Error::LengthMismatch(_))));
        assert!(eoc(&[1.0, 0.5], &[0.5, 0.3]).is_err());
    }

    #[test]
    fn reference_has_four_times_the_elements_and_quarter_step() {
        let p = fixtures::load("single_pipe").unwrap();
        let c = pipe_config(0.25);
        let run = solve(&c, &p.topology, &p.boundary).unwrap();
        let reference = compute_reference(&c, &p.topology, &p.boundary).unwrap();
        assert_eq!(reference.mesh().element_count(), 4 * run.mesh().element_count());
        assert_eq!(reference.tau, run.tau / 4.0);
        assert_eq!(reference.trajectory.times, run.trajectory.times);
    }

    #[test]
    fn self_error_is_zero() {
        let p = fixtures::load("single_pipe").unwrap();
        let c = pipe_config(0.25);
        let run = solve(&c, &p.topology, &p.boundary).unwrap();
        assert!(error_ref(&run, &run).unwrap() < 1e-13);
    }

    #[test]
    fn nested_error_agrees_with_merged_distance() {
        let p = fixtures::load("y_junction").unwrap();
        let c = pipe_config(0.25);
        let run = solve(&c, &p.topology, &p.boundary).unwrap();
        let reference = compute_reference(&c, &p.topology, &p.boundary).unwrap();
        let a = error_ref(&run, &reference).unwrap();
        let b = trajectory_distance(&run, &reference).unwrap();
        assert!(a > 0.0);
        assert!((a - b).abs() <= 1e-10 * a, "{a} vs {b}");
    }

    #[test]
    fn l2_distance_is_a_metric_on_samples() {
        let p = fixtures::load("single_pipe").unwrap();
        let t = &p.topology;
        let s1 = DiscreteSpace::new(&crate::mesh::build_uniform(t, 1.0 / 3.0).unwrap(), t, 2).unwrap();
        let s2 = DiscreteSpace::new(&crate::mesh::build_graded(t, 1e-2, 0.25, 2).unwrap(), t, 2).unwrap();
        let u = s1.project_pi_h(t, |_, x, _| x.sin()).unwrap();
        let v = s2.project_pi_h(t, |_, x, _| x * x).unwrap();
        let w = s2.project_pi_h(t, |_, x, _| 1.0 - x).unwrap();
        let uv = l2_distance(&s1, &u, &s2, &v).unwrap();
        let vw = l2_distance(&s2, &v, &s2, &w).unwrap();
        let uw = l2_distance(&s1, &u, &s2, &w).unwrap();
        assert!(uw <= uv + vw + 1e-14);
        assert!(l2_distance(&s1, &u, &s1, &u).unwrap() == 0.0);
        // x - x^2 on [0, 1] projected exactly has norm sqrt(1/30)
        let a = s1.project_pi_h(t, |_, x, _| x).unwrap();
        let b = s2.project_pi_h(t, |_, x, _| x * x).unwrap();
        let d = l2_distance(&s1, &a, &s2, &b).unwrap();
        assert!((d - (1.0f64 / 30.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn finer_reference_gives_smaller_error() {
        let p = fixtures::load("single_pipe").unwrap();
        let c = pipe_config(0.25);
        let mesh = build_mesh(&c, &p.topology).unwrap();
        let run = solve(&c, &p.topology, &p.boundary).unwrap();
        let once = solve_on_mesh(
            &mesh.refine_uniformly(),
            &p.topology,
            &p.boundary,
            Branch::Convdiff,
            &c,
            c.tau() / 2.0,
            2,
        )
        .unwrap();
        let twice = compute_reference(&c, &p.topology, &p.boundary).unwrap();
        let e1 = error_ref(&run, &once).unwrap();
        let e2 = error_ref(&run, &twice).unwrap();
        assert!(e1 <= e2, "{e1} vs {e2}");
    }

    #[test]
    fn monitor_zero_and_symmetric() {
        let p = fixtures::load("single_pipe").unwrap();
        let c = pipe_config(0.25);
        let zero = BoundaryData::zeros(&p.topology);
        let sol = solve(&c, &p.topology, &zero).unwrap();
        let m = max_principle_monitor(&sol, &zero, 0.2);
        assert_eq!((m.min, m.max, m.relative, m.flagged), (0.0, 0.0, 0.0, false));

        let pos = solve(&c, &p.topology, &p.boundary).unwrap();
        let neg_data = p.boundary.scaled(-1.0);
        let neg = solve(&c, &p.topology, &neg_data).unwrap();
        let a = max_principle_monitor(&pos, &p.boundary, 0.2);
        let b = max_principle_monitor(&neg, &neg_data, 0.2);
        assert_eq!(a.max, -b.min);
        assert_eq!(a.min, -b.max);
        assert_eq!(a.relative, b.relative);
    }

    #[test]
    fn single_pipe_stays_within_data_envelope() {
        let p = fixtures::load("single_pipe").unwrap();
        let c = SolveConfig::default();
        let sol = solve(&c, &p.topology, &p.boundary).unwrap();
        let m = max_principle_monitor(&sol, &p.boundary, 0.05);
        assert!(!m.flagged, "{m:?}");
        assert!(m.max > 0.0);
    }

    #[test]
    fn report_formatting() {
        let row = ReportRow {
            branch: Branch::Convdiff,
            k: 2,
            alpha: 1.0,
            eps: 1e-2,
            h: 0.125,
            tau: 0.0625,
            elements: 20,
            layer_elements: 12,
            error: 0.5,
            eoc: None,
        };
        let csv = report_csv(&[row.clone(), ReportRow { eoc: Some(2.0), ..row }]);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], REPORT_HEADER);
        assert!(lines[1].starts_with("convdiff,2,1.0000000000000000e0,1.0000000000000000e-2,"));
        assert!(lines[1].ends_with(','));
        assert!(lines[2].ends_with("2.0000000000000000e0"));
        assert_eq!(plot_csv(&[]), "epsilon,h,error\n");
    }

    #[test]
    fn sweep_orders_and_rates() {
        let p = fixtures::load("single_pipe").unwrap();
        let base = pipe_config(0.25);
        let entries = sweep(&base, &p.topology, &p.boundary, &[1e-2, 1e-3], &[0.25, 0.125]);
        assert_eq!(entries.len(), 4);
        let keys: Vec<_> = entries.iter().map(|e| (e.config.eps, e.config.h)).collect();
        assert_eq!(keys, vec![(1e-2, 0.25), (1e-2, 0.125), (1e-3, 0.25), (1e-3, 0.125)]);
        let rows: Vec<_> = entries.iter().map(|e| e.outcome.clone().unwrap()).collect();
        assert!(rows[0].eoc.is_none() && rows[2].eoc.is_none());
        assert!(rows[1].eoc.unwrap() > 1.0);
        let bad = SolveConfig { k: 0, ..base };
        let entries = sweep(&bad, &p.topology, &p.boundary, &[1e-2], &[0.25]);
        assert!(entries[0].outcome.is_err());
    }

    #[test]
    fn gap_shrinks_with_eps() {
        let p = fixtures::load("single_pipe").unwrap();
        let c = pipe_config(1.0 / 16.0);
        let gaps = asymptotic_gap(&p.topology, &p.boundary, &[1e-2, 5e-3], &c).unwrap();
        assert!(gaps[1].gap < gaps[0].gap);
        assert!(gaps[1].ratio.unwrap() > 1.0);
        let g = BoundaryData::zeros(&p.topology)
            .with(&p.topology, "v1", TimeProfile::ramp(1.0, 3, 1.0))
            .unwrap();
        assert!(asymptotic_gap(&p.topology, &g, &[0.0], &c).is_err());
    }
}
