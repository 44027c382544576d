//! Directed pipe networks.
//!
//! Every edge is oriented along the background flow, so a positive velocity
//! always points from `tail` to `head`. Incidence follows the usual
//! convention `n_e(tail) = -1`, `n_e(head) = +1`.
//!
//! Networks are read from a small TOML document:
//!
//! ```toml
//! horizon = 3.0
//! vertices = ["v1", "v2"]
//!
//! [[edges]]
//! id = "e1"
//! tail = "v1"
//! head = "v2"
//! length = 1.0
//! velocity = 1.0
//!
//! [boundary.v1]
//! kind = "ramp"
//! c = 9.0
//! p = 3
//! ```

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Classification of a vertex by its role in the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexClass {
    /// Junction with at least two incident edges.
    Interior,
    /// Boundary vertex from which an edge leaves into the network.
    Inflow,
    /// Boundary vertex in which an edge terminates.
    Outflow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub length: f64,
    pub velocity: f64,
}

#[derive(Debug, Clone)]
pub struct NetworkTopology {
    vertex_ids: Vec<String>,
    edges: Vec<Edge>,
    incident: Vec<Vec<usize>>,
    edges_in: Vec<Vec<usize>>,
    edges_out: Vec<Vec<usize>>,
    classes: Vec<VertexClass>,
}

impl NetworkTopology {
    /// Builds and validates a topology. Edges are given as
    /// `(id, tail id, head id, length, velocity)`.
    pub fn new<V: AsRef<str>, S: AsRef<str>>(
        vertices: &[V],
        edges: &[(S, S, S, f64, f64)],
    ) -> Result<Self> {
        let mut index = HashMap::new();
        let mut vertex_ids = Vec::with_capacity(vertices.len());
        for v in vertices {
            let v = v.as_ref();
            if index.insert(v.to_string(), vertex_ids.len()).is_some() {
                return Err(Error::DuplicateId {
                    kind: "vertex",
                    id: v.to_string(),
                });
            }
            vertex_ids.push(v.to_string());
        }
        if edges.is_empty() {
            return Err(Error::Parse("network has no edges".into()));
        }

        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::UnknownVertex(id.to_string()))
        };
        let mut seen = HashSet::new();
        let mut list = Vec::with_capacity(edges.len());
        for (id, tail, head, length, velocity) in edges {
            let id = id.as_ref();
            if !seen.insert(id.to_string()) {
                return Err(Error::DuplicateId {
                    kind: "edge",
                    id: id.to_string(),
                });
            }
            let (tail, head) = (lookup(tail.as_ref())?, lookup(head.as_ref())?);
            if tail == head {
                return Err(Error::SelfLoop(id.to_string()));
            }
            for (what, value) in [("length", *length), ("velocity", *velocity)] {
                if !(value > 0.0) || !value.is_finite() {
                    return Err(Error::NonPositive {
                        edge: id.to_string(),
                        what,
                        value,
                    });
                }
            }
            list.push(Edge {
                id: id.to_string(),
                tail,
                head,
                length: *length,
                velocity: *velocity,
            });
        }

        let n = vertex_ids.len();
        let mut incident = vec![Vec::new(); n];
        let mut edges_in = vec![Vec::new(); n];
        let mut edges_out = vec![Vec::new(); n];
        for (e, edge) in list.iter().enumerate() {
            incident[edge.tail].push(e);
            incident[edge.head].push(e);
            edges_out[edge.tail].push(e);
            edges_in[edge.head].push(e);
        }

        // breadth-first search over the undirected graph
        let mut visited = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        visited[0] = true;
        while let Some(v) = queue.pop_front() {
            for &e in &incident[v] {
                let w = if list[e].tail == v { list[e].head } else { list[e].tail };
                if !visited[w] {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if visited.iter().any(|&seen| !seen) {
            return Err(Error::Disconnected);
        }

        let classes = (0..n)
            .map(|v| {
                if incident[v].len() > 1 {
                    VertexClass::Interior
                } else {
                    let e = incident[v][0];
                    let n_e = if list[e].head == v { 1.0 } else { -1.0 };
                    if list[e].velocity * n_e > 0.0 {
                        VertexClass::Outflow
                    } else {
                        VertexClass::Inflow
                    }
                }
            })
            .collect();

        Ok(Self {
            vertex_ids,
            edges: list,
            incident,
            edges_in,
            edges_out,
            classes,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertex_ids
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertex_ids[v]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertex_ids.iter().position(|v| v == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    /// Incidence number `n_e(v)`.
    pub fn incidence(&self, e: usize, v: usize) -> i8 {
        let edge = &self.edges[e];
        if edge.head == v {
            1
        } else if edge.tail == v {
            -1
        } else {
            0
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident[v].len()
    }

    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    /// Edges pointing into `v` (`n_e(v) > 0`).
    pub fn edges_into(&self, v: usize) -> &[usize] {
        &self.edges_in[v]
    }

    /// Edges leaving `v` (`n_e(v) < 0`).
    pub fn edges_out_of(&self, v: usize) -> &[usize] {
        &self.edges_out[v]
    }

    pub fn class(&self, v: usize) -> VertexClass {
        self.classes[v]
    }

    pub fn vertices_of_class(&self, class: VertexClass) -> Vec<usize> {
        (0..self.vertex_count())
            .filter(|&v| self.classes[v] == class)
            .collect()
    }

    pub fn interior_vertices(&self) -> Vec<usize> {
        self.vertices_of_class(VertexClass::Interior)
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.classes[v] != VertexClass::Interior
    }

    pub fn velocity_bounds(&self) -> (f64, f64) {
        self.edges.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), e| {
            (lo.min(e.velocity), hi.max(e.velocity))
        })
    }

    pub fn min_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.length)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// `Σ_e b_e n_e(v)` for every interior vertex, in vertex order.
    pub fn flow_residuals(&self) -> Vec<(usize, f64)> {
        self.interior_vertices()
            .into_iter()
            .map(|v| {
                let r = self.incident[v]
                    .iter()
                    .map(|&e| self.edges[e].velocity * f64::from(self.incidence(e, v)))
                    .sum();
                (v, r)
            })
            .collect()
    }

    /// Checks mass conservation at junctions. With `tol = 0` the residual
    /// has to vanish exactly.
    pub fn validate_flow_conservation(&self, tol: f64) -> Result<Vec<(usize, f64)>> {
        let residuals = self.flow_residuals();
        let bad: Vec<_> = residuals
            .iter()
            .filter(|(_, r)| r.abs() > tol)
            .map(|&(v, r)| (self.vertex_ids[v].clone(), r))
            .collect();
        if bad.is_empty() {
            Ok(residuals)
        } else {
            Err(Error::FlowConservation(bad))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Zero,
    #[serde(alias = "ramp")]
    MonomialRamp,
}

/// Boundary datum `c (t / horizon)^p`, held at `c` after the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeProfile {
    pub kind: ProfileKind,
    pub c: f64,
    pub p: u32,
    pub horizon: f64,
}

impl TimeProfile {
    pub fn zero() -> Self {
        Self {
            kind: ProfileKind::Zero,
            c: 0.0,
            p: 1,
            horizon: 1.0,
        }
    }

    pub fn ramp(c: f64, p: u32, horizon: f64) -> Self {
        Self {
            kind: ProfileKind::MonomialRamp,
            c,
            p,
            horizon,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.kind {
            ProfileKind::Zero => 0.0,
            ProfileKind::MonomialRamp => {
                let s = (t / self.horizon).clamp(0.0, 1.0);
                self.c * s.powi(self.p as i32)
            }
        }
    }

    /// Number of vanishing time derivatives at `t = 0` minus one; `None`
    /// for the zero profile.
    pub fn compatibility_order(&self) -> Option<u32> {
        match self.kind {
            ProfileKind::Zero => None,
            ProfileKind::MonomialRamp => Some(self.p - 1),
        }
    }

    fn validate(&self, vertex: &str) -> Result<()> {
        let fail = |reason: &str| {
            Err(Error::Profile {
                vertex: vertex.to_string(),
                reason: reason.to_string(),
            })
        };
        if self.kind == ProfileKind::Zero {
            return Ok(());
        }
        if self.p < 1 {
            return fail("exponent must be at least 1");
        }
        if !(self.horizon > 0.0) {
            return fail("horizon must be positive");
        }
        if !self.c.is_finite() {
            return fail("coefficient must be finite");
        }
        Ok(())
    }
}

/// Boundary profiles indexed by vertex; interior vertices carry zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    profiles: Vec<TimeProfile>,
}

impl BoundaryData {
    pub fn zeros(topology: &NetworkTopology) -> Self {
        Self {
            profiles: vec![TimeProfile::zero(); topology.vertex_count()],
        }
    }

    /// Sets the profile at a boundary vertex.
    pub fn set(&mut self, topology: &NetworkTopology, v: usize, profile: TimeProfile) -> Result<()> {
        let id = topology.vertex_id(v);
        if !topology.is_boundary(v) {
            return Err(Error::BoundaryDegree {
                vertex: id.to_string(),
                degree: topology.degree(v),
            });
        }
        profile.validate(id)?;
        self.profiles[v] = profile;
        Ok(())
    }

    pub fn with(mut self, topology: &NetworkTopology, vertex: &str, profile: TimeProfile) -> Result<Self> {
        let v = topology
            .vertex_index(vertex)
            .ok_or_else(|| Error::UnknownVertex(vertex.to_string()))?;
        self.set(topology, v, profile)?;
        Ok(self)
    }

    pub fn profile(&self, v: usize) -> &TimeProfile {
        &self.profiles[v]
    }

    pub fn value(&self, v: usize, t: f64) -> f64 {
        self.profiles[v].value(t)
    }

    /// Profiles with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            profiles: self
                .profiles
                .iter()
                .map(|p| TimeProfile { c: p.c * factor, ..*p })
                .collect(),
        }
    }

    /// Minimum compatibility order over all nonzero profiles.
    pub fn compatibility_order(&self) -> Option<u32> {
        self.profiles.iter().filter_map(|p| p.compatibility_order()).min()
    }

    /// Warning text when the data are not smooth enough for order `k`.
    pub fn compatibility_warning(&self, k: usize) -> Option<String> {
        match self.compatibility_order() {
            Some(m) if (m as usize) < k => Some(format!(
                "boundary data compatibility order m = {m} is below polynomial order k = {k}; \
                 optimal rates are not guaranteed"
            )),
            _ => None,
        }
    }

    /// Range `[min, max]` of the data over `[0, t_max]`, always including 0.
    pub fn range(&self, t_max: f64) -> (f64, f64) {
        // monomial ramps are monotone, so the extremes are at 0 and t_max
        self.profiles.iter().fold((0.0_f64, 0.0_f64), |(lo, hi), p| {
            let v = p.value(t_max);
            (lo.min(v), hi.max(v))
        })
    }
}

/// A topology together with boundary data and time horizon.
#[derive(Debug, Clone)]
pub struct NetworkProblem {
    pub topology: NetworkTopology,
    pub boundary: BoundaryData,
    pub horizon: f64,
    pub flow_tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct NetworkDocument {
    horizon: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    flow_tol: f64,
    vertices: Vec<String>,
    edges: Vec<EdgeEntry>,
    #[serde(default)]
    boundary: BTreeMap<String, ProfileEntry>,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct EdgeEntry {
    id: String,
    tail: String,
    head: String,
    length: f64,
    velocity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct ProfileEntry {
    kind: ProfileKind,
    #[serde(default)]
    c: f64,
    #[serde(default = "default_exponent")]
    p: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    horizon: Option<f64>,
}

fn default_exponent() -> u32 {
    1
}

fn parse_document(text: &str) -> Result<NetworkDocument> {
    toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn topology_from(doc: &NetworkDocument) -> Result<NetworkTopology> {
    let edges: Vec<_> = doc
        .edges
        .iter()
        .map(|e| {
            (
                e.id.as_str(),
                e.tail.as_str(),
                e.head.as_str(),
                e.length,
                e.velocity,
            )
        })
        .collect();
    NetworkTopology::new(&doc.vertices, &edges)
}

/// Parses and structurally validates a network document.
pub fn load_network(text: &str) -> Result<NetworkTopology> {
    let doc = parse_document(text)?;
    topology_from(&doc)
}

/// Parses a network document including boundary data, and checks flow
/// conservation with the document's `flow_tol` (exact by default).
pub fn load_problem(text: &str) -> Result<NetworkProblem> {
    let doc = parse_document(text)?;
    if !(doc.horizon > 0.0) {
        return Err(Error::Parse(format!("horizon must be positive, got {}", doc.horizon)));
    }
    let topology = topology_from(&doc)?;
    let mut boundary = BoundaryData::zeros(&topology);
    for (vertex, entry) in &doc.boundary {
        let v = topology
            .vertex_index(vertex)
            .ok_or_else(|| Error::UnknownVertex(vertex.clone()))?;
        let profile = TimeProfile {
            kind: entry.kind,
            c: entry.c,
            p: entry.p,
            horizon: entry.horizon.unwrap_or(doc.horizon),
        };
        boundary.set(&topology, v, profile)?;
    }
    topology.validate_flow_conservation(doc.flow_tol)?;
    Ok(NetworkProblem {
        topology,
        boundary,
        horizon: doc.horizon,
        flow_tol: doc.flow_tol,
    })
}

impl NetworkProblem {
    /// Serializes back into the document format read by [`load_problem`].
    pub fn to_document(&self) -> String {
        let t = &self.topology;
        let boundary = (0..t.vertex_count())
            .filter(|&v| t.is_boundary(v) && self.boundary.profile(v).kind != ProfileKind::Zero)
            .map(|v| {
                let p = self.boundary.profile(v);
                (
                    t.vertex_id(v).to_string(),
                    ProfileEntry {
                        kind: p.kind,
                        c: p.c,
                        p: p.p,
                        horizon: (p.horizon != self.horizon).then_some(p.horizon),
                    },
                )
            })
            .collect();
        let doc = NetworkDocument {
            horizon: self.horizon,
            flow_tol: self.flow_tol,
            vertices: t.vertex_ids().to_vec(),
            edges: t
                .edges()
                .iter()
                .map(|e| EdgeEntry {
                    id: e.id.clone(),
                    tail: t.vertex_id(e.tail).to_string(),
                    head: t.vertex_id(e.head).to_string(),
                    length: e.length,
                    velocity: e.velocity,
                })
                .collect(),
            boundary,
        };
        toml::to_string(&doc).expect("network document serializes")
    }
}

/// Bundled network documents.
pub mod fixtures {
    use super::{load_problem, NetworkProblem};
    use crate::error::{Error, Result};

    pub const SINGLE_PIPE: &str = include_str!("../fixtures/single_pipe.toml");
    pub const GASLIB11: &str = include_str!("../fixtures/gaslib11.toml");
    pub const Y_JUNCTION: &str = include_str!("../fixtures/y_junction.toml");

    pub const NAMES: [&str; 3] = ["single_pipe", "gaslib11", "y_junction"];

    pub fn text(name: &str) -> Option<&'static str> {
        match name {
            "single_pipe" => Some(SINGLE_PIPE),
            "gaslib11" => Some(GASLIB11),
            "y_junction" => Some(Y_JUNCTION),
            _ => None,
        }
    }

    pub fn load(name: &str) -> Result<NetworkProblem> {
        let text = text(name).ok_or_else(|| Error::Config(format!("unknown fixture `{name}`")))?;
        load_problem(text)
    }
}
