//! Quasi-uniform and layer-adapted (Gartland-type) edge meshes.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::network::NetworkTopology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// Quasi-uniform part away from the outflow layer.
    Uniform,
    /// Geometrically graded part inside the outflow layer.
    Layer,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Uniform => "uniform",
            Region::Layer => "layer",
        }
    }
}

/// Which side of a breakpoint a point evaluation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Limit from below, `w^-`.
    Left,
    /// Limit from above, `w^+`.
    Right,
}

/// Partition `0 = x_0 < x_1 < ... < x_M = length` of one edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMesh {
    breakpoints: Vec<f64>,
    regions: Vec<Region>,
    transition: Option<f64>,
}

impl EdgeMesh {
    fn uniform(length: f64, h: f64) -> Self {
        let m = uniform_count(length, h);
        let mut breakpoints: Vec<f64> = (0..=m).map(|j| j as f64 * length / m as f64).collect();
        breakpoints[m] = length;
        Self {
            regions: vec![Region::Uniform; m],
            breakpoints,
            transition: None,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn element_count(&self) -> usize {
        self.regions.len()
    }

    pub fn length(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn bounds(&self, i: usize) -> (f64, f64) {
        (self.breakpoints[i], self.breakpoints[i + 1])
    }

    pub fn width(&self, i: usize) -> f64 {
        self.breakpoints[i + 1] - self.breakpoints[i]
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.breakpoints.windows(2).map(|w| w[1] - w[0])
    }

    pub fn region(&self, i: usize) -> Region {
        self.regions[i]
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn transition(&self) -> Option<f64> {
        self.transition
    }

    pub fn count(&self, region: Region) -> usize {
        self.regions.iter().filter(|&&r| r == region).count()
    }

    /// Element containing `x`; at a breakpoint, `side` picks the element
    /// to its left or right. Returns `None` outside `[0, length]`.
    pub fn locate(&self, x: f64, side: Side) -> Option<usize> {
        let len = self.length();
        let tol = 1e-12 * len;
        if x < -tol || x > len + tol {
            return None;
        }
        let m = self.element_count();
        // number of breakpoints <= x (or < x for left limits)
        let idx = match side {
            Side::Right => self.breakpoints.partition_point(|&p| p <= x),
            Side::Left => self.breakpoints.partition_point(|&p| p < x),
        };
        Some(idx.saturating_sub(1).min(m - 1))
    }

    /// Splits every element into two halves.
    pub fn bisect(&self) -> Self {
        let mut breakpoints = Vec::with_capacity(2 * self.breakpoints.len());
        let mut regions = Vec::with_capacity(2 * self.regions.len());
        for (i, w) in self.breakpoints.windows(2).enumerate() {
            breakpoints.push(w[0]);
            breakpoints.push(0.5 * (w[0] + w[1]));
            regions.extend([self.regions[i]; 2]);
        }
        breakpoints.push(self.length());
        Self {
            breakpoints,
            regions,
            transition: self.transition,
        }
    }

    /// True if every breakpoint of `coarse` is (to rounding) a breakpoint
    /// of `self`.
    pub fn refines(&self, coarse: &EdgeMesh) -> bool {
        let tol = 1e-12 * self.length().max(1.0);
        if (self.length() - coarse.length()).abs() > tol {
            return false;
        }
        coarse.breakpoints.iter().all(|&x| {
            let i = self.breakpoints.partition_point(|&p| p < x - tol);
            i < self.breakpoints.len() && (self.breakpoints[i] - x).abs() <= tol
        })
    }
}

fn uniform_count(length: f64, h: f64) -> usize {
    ((length / h) - 1e-10).ceil().max(1.0) as usize
}

/// One edge mesh per network edge, in edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkMesh {
    edges: Vec<EdgeMesh>,
    target_h: f64,
}

impl NetworkMesh {
    pub fn from_edges(edges: Vec<EdgeMesh>, target_h: f64) -> Self {
        Self { edges, target_h }
    }

    pub fn edges(&self) -> &[EdgeMesh] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &EdgeMesh {
        &self.edges[e]
    }

    /// The width parameter the mesh was built for.
    pub fn target_h(&self) -> f64 {
        self.target_h
    }

    /// Largest element width.
    pub fn h(&self) -> f64 {
        self.edges
            .iter()
            .flat_map(|m| m.widths())
            .fold(0.0, f64::max)
    }

    pub fn element_count(&self) -> usize {
        self.edges.iter().map(EdgeMesh::element_count).sum()
    }

    /// Interior mesh points `(edge, breakpoint index)`, vertices excluded.
    pub fn interior_points(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .enumerate()
            .flat_map(|(e, m)| (1..m.element_count()).map(move |i| (e, i)))
            .collect()
    }

    pub fn refine_uniformly(&self) -> Self {
        Self {
            edges: self.edges.iter().map(EdgeMesh::bisect).collect(),
            target_h: 0.5 * self.target_h,
        }
    }

    pub fn refines(&self, coarse: &NetworkMesh) -> bool {
        self.edges.len() == coarse.edges.len()
            && self
                .edges
                .iter()
                .zip(&coarse.edges)
                .all(|(f, c)| f.refines(c))
    }

    /// Diagnostic dump with columns `edge_id,index,x,width,region`, one row
    /// per element (`x` is its left endpoint).
    pub fn to_csv(&self, topology: &NetworkTopology) -> String {
        let mut out = String::from("edge_id,index,x,width,region\n");
        for (e, m) in self.edges.iter().enumerate() {
            for i in 0..m.element_count() {
                let _ = writeln!(
                    out,
                    "{},{},{:.16e},{:.16e},{}",
                    topology.edge(e).id,
                    i,
                    m.breakpoints[i],
                    m.width(i),
                    m.regions[i].as_str()
                );
            }
        }
        out
    }
}

fn check_h(topology: &NetworkTopology, h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::MeshParameter(format!("width must be positive, got {h}")));
    }
    let shortest = topology.min_length();
    if h > shortest * (1.0 + 1e-12) {
        return Err(Error::MeshParameter(format!(
            "width {h} exceeds the shortest edge length {shortest}"
        )));
    }
    Ok(())
}

/// Splits every edge into `ceil(length / h)` equal elements.
pub fn build_uniform(topology: &NetworkTopology, h: f64) -> Result<NetworkMesh> {
    check_h(topology, h)?;
    Ok(NetworkMesh {
        edges: topology
            .edges()
            .iter()
            .map(|e| EdgeMesh::uniform(e.length, h))
            .collect(),
        target_h: h,
    })
}

/// Start of the layer region, `length - (k+1)/b * eps * ln(1/eps)`,
/// clamped from below at `length / 2`. Returns `length` when the layer is
/// empty.
pub fn transition_point(length: f64, velocity: f64, eps: f64, k: usize) -> f64 {
    if !(eps > 0.0) || eps >= 1.0 {
        return length;
    }
    let raw = length - (k as f64 + 1.0) / velocity * eps * (1.0 / eps).ln();
    if raw >= length {
        length
    } else {
        raw.max(0.5 * length)
    }
}

/// Shishkin-type transition point `length - (k+1)/b * eps * ln(1/h)`
/// (diagnostic only).
pub fn shishkin_point(length: f64, velocity: f64, eps: f64, h: f64, k: usize) -> f64 {
    length - (k as f64 + 1.0) / velocity * eps * (1.0 / h).ln()
}

fn graded_edge(length: f64, velocity: f64, eps: f64, h: f64, k: usize) -> EdgeMesh {
    let x_star = transition_point(length, velocity, eps, k);
    if x_star >= length {
        return EdgeMesh::uniform(length, h);
    }
    let m = uniform_count(length, h);
    let tol = 1e-12 * length;
    let mut breakpoints: Vec<f64> = (0..m)
        .map(|j| j as f64 * length / m as f64)
        .take_while(|&x| x < x_star - tol)
        .collect();
    let uniform_elements = breakpoints.len();
    breakpoints.push(x_star);

    // right to left from the outflow end
    let scale = velocity / (eps * (k as f64 + 1.0));
    let width_at = |x: f64| eps * h * (scale * (length - x)).exp();
    let mut layer = vec![length];
    let mut x = length;
    loop {
        let w = width_at(x);
        let next = x - w;
        if next > x_star + tol {
            layer.push(next);
            x = next;
            continue;
        }
        // leftmost layer element [x_star, x]; avoid a sliver that is
        // narrower than the recursion's next width or its right neighbour
        if layer.len() > 1 {
            let gap = x - x_star;
            let right = layer[layer.len() - 2] - x;
            if gap < (0.25 * w).max(right) {
                layer.pop();
            }
        }
        break;
    }
    layer.reverse();
    breakpoints.extend(layer);

    let total = breakpoints.len() - 1;
    let mut regions = vec![Region::Uniform; uniform_elements];
    regions.resize(total, Region::Layer);
    EdgeMesh {
        breakpoints,
        regions,
        transition: Some(x_star),
    }
}

/// Layer-adapted mesh: uniform breakpoints left of the transition point,
/// geometric grading towards each outflow end. `eps = 0` yields the
/// uniform mesh.
pub fn build_graded(topology: &NetworkTopology, eps: f64, h: f64, k: usize) -> Result<NetworkMesh> {
    check_h(topology, h)?;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::MeshParameter(format!("eps must lie in [0, 1], got {eps}")));
    }
    if k < 1 {
        return Err(Error::MeshParameter("polynomial order must be at least 1".into()));
    }
    if eps == 0.0 {
        return build_uniform(topology, h);
    }
    Ok(NetworkMesh {
        edges: topology
            .edges()
            .iter()
            .map(|e| graded_edge(e.length, e.velocity, eps, h, k))
            .collect(),
        target_h: h,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshStats {
    pub elements: usize,
    pub uniform_elements: usize,
    pub layer_elements: usize,
    pub min_width: f64,
    pub max_width: f64,
    /// Layer elements reaching left of the Shishkin point.
    pub layer_beyond_shishkin: usize,
}

pub fn mesh_stats(mesh: &NetworkMesh, topology: &NetworkTopology, eps: f64, k: usize) -> MeshStats {
    let widths = mesh.edges.iter().flat_map(|m| m.widths());
    let (min_width, max_width) = widths.fold((f64::INFINITY, 0.0_f64), |(lo, hi), w| (lo.min(w), hi.max(w)));
    let mut beyond = 0;
    if eps > 0.0 {
        for (e, m) in mesh.edges.iter().enumerate() {
            let edge = topology.edge(e);
            let xs = shishkin_point(edge.length, edge.velocity, eps, mesh.target_h, k);
            beyond += (0..m.element_count())
                .filter(|&i| m.regions[i] == Region::Layer && m.breakpoints[i] < xs)
                .count();
        }
    }
    let layer_elements = mesh.edges.iter().map(|m| m.count(Region::Layer)).sum();
    MeshStats {
        elements: mesh.element_count(),
        uniform_elements: mesh.element_count() - layer_elements,
        layer_elements,
        min_width,
        max_width,
        layer_beyond_shishkin: beyond,
    }
}
