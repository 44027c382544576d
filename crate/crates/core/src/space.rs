//! Broken polynomial spaces on a network mesh plus hybrid point values.
//!
//! Bulk unknowns are coefficients in a per-element Legendre basis scaled to
//! be L2-orthonormal, so the bulk mass matrix is the identity. Dofs are laid
//! out element by element (edges in order), followed by one hybrid dof per
//! interior mesh point (edge by edge) and finally one per interior vertex.

use std::fmt::Write as _;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::mesh::{NetworkMesh, Region, Side};
use crate::network::NetworkTopology;
use crate::quadrature::{legendre, legendre_derivative, GaussLegendre};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub edge: usize,
    /// Position of the element along its edge.
    pub local: usize,
    pub x0: f64,
    pub x1: f64,
    pub region: Region,
}

impl Element {
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    fn reference(&self, x: f64) -> f64 {
        2.0 * (x - self.x0) / self.width() - 1.0
    }

    /// `(xi, x, weight)` per quadrature node. Basis functions should be
    /// evaluated at the exact `xi`: recovering it from `x` loses digits on
    /// very thin elements.
    fn nodes<'a>(&self, rule: &'a GaussLegendre) -> impl Iterator<Item = (f64, f64, f64)> + 'a {
        let (x0, half) = (self.x0, 0.5 * self.width());
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(move |(&xi, &w)| (xi, x0 + half * (xi + 1.0), half * w))
    }
}

/// Orthonormal basis values on an element of width `h` at reference point `xi`.
pub fn basis_values(k: usize, h: f64, xi: f64) -> Vec<f64> {
    legendre(k, xi)
        .into_iter()
        .enumerate()
        .map(|(j, p)| ((2 * j + 1) as f64 / h).sqrt() * p)
        .collect()
}

/// Physical derivatives of the orthonormal basis.
pub fn basis_derivatives(k: usize, h: f64, xi: f64) -> Vec<f64> {
    legendre_derivative(k, xi)
        .into_iter()
        .enumerate()
        .map(|(j, d)| ((2 * j + 1) as f64 / h).sqrt() * d * 2.0 / h)
        .collect()
}

#[derive(Debug, Clone)]
pub struct DiscreteSpace {
    mesh: NetworkMesh,
    k: usize,
    elements: Vec<Element>,
    edge_offsets: Vec<usize>,
    point_dofs: Vec<Vec<Option<usize>>>,
    vertex_dofs: Vec<Option<usize>>,
    hybrid_points: Vec<HybridPoint>,
    bulk_dim: usize,
    hybrid_dim: usize,
}

/// Location of a hybrid dof.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HybridPoint {
    /// Interior mesh point `(edge, breakpoint index)`.
    Mesh(usize, usize),
    /// Interior vertex of the graph.
    Vertex(usize),
}

/// A combined bulk + hybrid coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    values: Vec<f64>,
}

impl CoefficientVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
        }
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &CoefficientVector) -> CoefficientVector {
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        }
    }

    pub fn scale(&self, alpha: f64) -> CoefficientVector {
        Self {
            values: self.values.iter().map(|a| alpha * a).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<usize> for CoefficientVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl IndexMut<usize> for CoefficientVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.values[i]
    }
}

impl DiscreteSpace {
    pub fn new(mesh: &NetworkMesh, topology: &NetworkTopology, k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::Config("polynomial order must be at least 1".into()));
        }
        if mesh.edges().len() != topology.edge_count() {
            return Err(Error::Config("mesh does not match the topology".into()));
        }
        let mut elements = Vec::with_capacity(mesh.element_count());
        let mut edge_offsets = Vec::with_capacity(mesh.edges().len() + 1);
        for (e, em) in mesh.edges().iter().enumerate() {
            edge_offsets.push(elements.len());
            for i in 0..em.element_count() {
                let (x0, x1) = em.bounds(i);
                elements.push(Element {
                    edge: e,
                    local: i,
                    x0,
                    x1,
                    region: em.region(i),
                });
            }
        }
        edge_offsets.push(elements.len());
        let bulk_dim = elements.len() * (k + 1);

        let mut next = bulk_dim;
        let mut hybrid_points = Vec::new();
        let mut point_dofs: Vec<Vec<Option<usize>>> = mesh
            .edges()
            .iter()
            .enumerate()
            .map(|(e, em)| {
                let m = em.element_count();
                (0..=m)
                    .map(|i| {
                        (i > 0 && i < m).then(|| {
                            hybrid_points.push(HybridPoint::Mesh(e, i));
                            next += 1;
                            next - 1
                        })
                    })
                    .collect()
            })
            .collect();
        let vertex_dofs: Vec<Option<usize>> = (0..topology.vertex_count())
            .map(|v| {
                (!topology.is_boundary(v)).then(|| {
                    hybrid_points.push(HybridPoint::Vertex(v));
                    next += 1;
                    next - 1
                })
            })
            .collect();
        for (e, edge) in topology.edges().iter().enumerate() {
            let last = point_dofs[e].len() - 1;
            point_dofs[e][0] = vertex_dofs[edge.tail];
            point_dofs[e][last] = vertex_dofs[edge.head];
        }

        Ok(Self {
            mesh: mesh.clone(),
            k,
            elements,
            edge_offsets,
            point_dofs,
            vertex_dofs,
            hybrid_points,
            bulk_dim,
            hybrid_dim: next - bulk_dim,
        })
    }

    pub fn mesh(&self) -> &NetworkMesh {
        &self.mesh
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.bulk_dim + self.hybrid_dim
    }

    pub fn bulk_dim(&self) -> usize {
        self.bulk_dim
    }

    pub fn hybrid_dim(&self) -> usize {
        self.hybrid_dim
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Element {
        &self.elements[i]
    }

    /// Global element index of element `local` on edge `edge`.
    pub fn element_index(&self, edge: usize, local: usize) -> usize {
        self.edge_offsets[edge] + local
    }

    pub fn edge_elements(&self, edge: usize) -> std::ops::Range<usize> {
        self.edge_offsets[edge]..self.edge_offsets[edge + 1]
    }

    /// First bulk dof of element `elem`; its `k + 1` dofs are consecutive.
    pub fn bulk_offset(&self, elem: usize) -> usize {
        elem * (self.k + 1)
    }

    /// Hybrid dof at breakpoint `i` of `edge`; `None` at boundary vertices.
    pub fn hybrid_dof(&self, edge: usize, i: usize) -> Option<usize> {
        self.point_dofs[edge][i]
    }

    pub fn vertex_dof(&self, v: usize) -> Option<usize> {
        self.vertex_dofs[v]
    }

    pub fn hybrid_points(&self) -> &[HybridPoint] {
        &self.hybrid_points
    }

    /// Hybrid dofs of the left and right endpoint of an element.
    pub fn element_hybrids(&self, elem: usize) -> (Option<usize>, Option<usize>) {
        let el = &self.elements[elem];
        (
            self.point_dofs[el.edge][el.local],
            self.point_dofs[el.edge][el.local + 1],
        )
    }

    pub fn zeros(&self) -> CoefficientVector {
        CoefficientVector::zeros(self.dim())
    }

    /// The constant function `c`, hybrids included, built exactly.
    pub fn constant(&self, c: f64) -> CoefficientVector {
        let mut u = self.zeros();
        for (i, el) in self.elements.iter().enumerate() {
            u[self.bulk_offset(i)] = c * el.width().sqrt();
        }
        for i in self.bulk_dim..self.dim() {
            u[i] = c;
        }
        u
    }

    pub fn check(&self, u: &CoefficientVector) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: u.len(),
            });
        }
        Ok(())
    }

    fn coefficients<'a>(&self, u: &'a CoefficientVector, elem: usize) -> &'a [f64] {
        let o = self.bulk_offset(elem);
        &u.as_slice()[o..o + self.k + 1]
    }

    /// Value of the element polynomial at `x` (no range check).
    pub fn eval_element(&self, u: &CoefficientVector, elem: usize, x: f64) -> f64 {
        let el = &self.elements[elem];
        let phi = basis_values(self.k, el.width(), el.reference(x));
        self.coefficients(u, elem).iter().zip(&phi).map(|(c, p)| c * p).sum()
    }

    pub fn eval_element_derivative(&self, u: &CoefficientVector, elem: usize, x: f64) -> f64 {
        let el = &self.elements[elem];
        let dphi = basis_derivatives(self.k, el.width(), el.reference(x));
        self.coefficients(u, elem).iter().zip(&dphi).map(|(c, p)| c * p).sum()
    }

    pub fn locate(&self, edge: usize, x: f64, side: Side) -> Result<usize> {
        let em = self.mesh.edge(edge);
        em.locate(x, side)
            .map(|i| self.element_index(edge, i))
            .ok_or(Error::OutsideEdge {
                edge,
                x,
                length: em.length(),
            })
    }

    /// Point value on `edge`; at breakpoints `side` selects the one-sided
    /// limit.
    pub fn evaluate(&self, u: &CoefficientVector, edge: usize, x: f64, side: Side) -> Result<f64> {
        let elem = self.locate(edge, x, side)?;
        Ok(self.eval_element(u, elem, x))
    }

    /// L2 norm of the bulk part (the basis is orthonormal).
    pub fn l2_norm(&self, u: &CoefficientVector) -> f64 {
        u.as_slice()[..self.bulk_dim].iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// L2 norm by quadrature, independent of the orthonormality shortcut.
    pub fn l2_norm_quadrature(&self, u: &CoefficientVector) -> f64 {
        let rule = GaussLegendre::new(self.k + 2);
        self.elements
            .iter()
            .enumerate()
            .map(|(i, el)| {
                rule.on_interval(el.x0, el.x1)
                    .map(|(x, w)| w * self.eval_element(u, i, x).powi(2))
                    .sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Projection defined by matching the left limit at each element's
    /// downwind end and orthogonality to `P_{k-1}` on each element. Hybrid
    /// dofs receive point values of `w` (left limit at mesh points, the
    /// first incident edge at interior vertices).
    pub fn project_pi_h<F>(&self, topology: &NetworkTopology, w: F) -> Result<CoefficientVector>
    where
        F: Fn(usize, f64, Side) -> f64,
    {
        let k = self.k;
        let default_rule = GaussLegendre::new(k + 2);
        let layer_rule = GaussLegendre::new(k + 4);
        let mut u = self.zeros();
        for (i, el) in self.elements.iter().enumerate() {
            let rule = match el.region {
                Region::Uniform => &default_rule,
                Region::Layer => &layer_rule,
            };
            let h = el.width();
            let o = self.bulk_offset(i);
            for (xi, x, wq) in el.nodes(rule) {
                let value = w(el.edge, x, Side::Right);
                if !value.is_finite() {
                    return Err(Error::NonFinite { edge: el.edge, x });
                }
                let phi = basis_values(k, h, xi);
                for j in 0..k {
                    u[o + j] += wq * value * phi[j];
                }
            }
            let target = w(el.edge, el.x1, Side::Left);
            if !target.is_finite() {
                return Err(Error::NonFinite { edge: el.edge, x: el.x1 });
            }
            let phi_out = basis_values(k, h, 1.0);
            let partial: f64 = (0..k).map(|j| u[o + j] * phi_out[j]).sum();
            u[o + k] = (target - partial) / phi_out[k];
        }
        for (n, point) in self.hybrid_points.iter().enumerate() {
            let value = match *point {
                HybridPoint::Mesh(e, i) => w(e, self.mesh.edge(e).breakpoints()[i], Side::Left),
                HybridPoint::Vertex(v) => {
                    let e = topology.incident_edges(v)[0];
                    let edge = topology.edge(e);
                    let x = if edge.head == v { edge.length } else { 0.0 };
                    let side = if edge.head == v { Side::Left } else { Side::Right };
                    w(e, x, side)
                }
            };
            u[self.bulk_dim + n] = value;
        }
        Ok(u)
    }

    /// Represents `u` exactly on a nested refinement `fine` of this space.
    /// Hybrid values at fine points that are coarse mesh points or vertices
    /// are copied; new points take the coarse polynomial value there.
    pub fn interpolate_to_refined(
        &self,
        u: &CoefficientVector,
        fine: &DiscreteSpace,
    ) -> Result<CoefficientVector> {
        self.check(u)?;
        if fine.k != self.k {
            return Err(Error::NotNested(format!(
                "polynomial orders differ ({} vs {})",
                self.k, fine.k
            )));
        }
        let same_vertices = fine.vertex_dofs.len() == self.vertex_dofs.len()
            && fine
                .vertex_dofs
                .iter()
                .zip(&self.vertex_dofs)
                .all(|(a, b)| a.is_some() == b.is_some());
        if !fine.mesh.refines(&self.mesh) || !same_vertices {
            return Err(Error::NotNested("fine mesh does not contain the coarse breakpoints".into()));
        }
        let k = self.k;
        let rule = GaussLegendre::new(k + 1);
        let mut out = fine.zeros();
        for (i, el) in fine.elements.iter().enumerate() {
            let mid = 0.5 * (el.x0 + el.x1);
            let coarse = self.locate(el.edge, mid, Side::Right)?;
            let o = fine.bulk_offset(i);
            let h = el.width();
            for (xi, x, w) in el.nodes(&rule) {
                let value = self.eval_element(u, coarse, x);
                let phi = basis_values(k, h, xi);
                for j in 0..=k {
                    out[o + j] += w * value * phi[j];
                }
            }
        }
        for (n, point) in fine.hybrid_points.iter().enumerate() {
            let value = match *point {
                HybridPoint::Vertex(v) => u[self.vertex_dofs[v].expect("same interior vertices")],
                HybridPoint::Mesh(e, i) => {
                    let x = fine.mesh.edge(e).breakpoints()[i];
                    let cm = self.mesh.edge(e);
                    let tol = 1e-12 * cm.length().max(1.0);
                    let j = cm.breakpoints().partition_point(|&p| p < x - tol);
                    if j < cm.breakpoints().len() && (cm.breakpoints()[j] - x).abs() <= tol {
                        let dof = self.point_dofs[e][j].expect("interior coarse point");
                        u[dof]
                    } else {
                        self.evaluate(u, e, x, Side::Left)?
                    }
                }
            };
            out[fine.bulk_dim + n] = value;
        }
        Ok(out)
    }

    /// Snapshot rows `(time, edge_id, x, value)` with `samples` points per
    /// element; element endpoints use the limit from inside the element.
    pub fn snapshot_csv(
        &self,
        topology: &NetworkTopology,
        states: &[(f64, &CoefficientVector)],
        samples: usize,
        header: bool,
    ) -> String {
        let mut out = String::new();
        if header {
            out.push_str("time,edge_id,x,value\n");
        }
        for &(t, u) in states {
            for (i, el) in self.elements.iter().enumerate() {
                for x in sample_points(el, samples) {
                    let _ = writeln!(
                        out,
                        "{:.16e},{},{:.16e},{:.16e}",
                        t,
                        topology.edge(el.edge).id,
                        x,
                        self.eval_element(u, i, x)
                    );
                }
            }
        }
        out
    }
}

fn sample_points(el: &Element, samples: usize) -> Vec<f64> {
    if samples <= 1 {
        return vec![0.5 * (el.x0 + el.x1)];
    }
    (0..samples)
        .map(|j| el.x0 + el.width() * j as f64 / (samples - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_graded, build_uniform};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pipe() -> NetworkTopology {
        NetworkTopology::new(&["v1", "v2"], &[("e1", "v1", "v2", 1.0, 1.0)]).unwrap()
    }

    fn y_junction() -> NetworkTopology {
        NetworkTopology::new(
            &["v1", "v2", "v3", "v4"],
            &[
                ("e1", "v1", "v3", 1.0, 1.0),
                ("e2", "v2", "v3", 1.0, 1.0),
                ("e3", "v3", "v4", 1.0, 2.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn dimensions() {
        let t = pipe();
        let s = DiscreteSpace::new(&build_uniform(&t, 0.25).unwrap(), &t, 2).unwrap();
        assert_eq!(s.dim(), 15);
        let y = y_junction();
        let s = DiscreteSpace::new(&build_uniform(&y, 1.0).unwrap(), &y, 1).unwrap();
        assert_eq!(s.dim(), 7);
        assert_eq!(s.hybrid_points(), &[HybridPoint::Vertex(2)]);
        assert_eq!(s.element_hybrids(0), (None, Some(6)));
        assert_eq!(s.element_hybrids(2), (Some(6), None));
    }

    #[test]
    fn basis_is_orthonormal() {
        for k in 1..5 {
            let h = 0.37;
            let rule = GaussLegendre::new(k + 2);
            let mut gram = vec![vec![0.0; k + 1]; k + 1];
            for (xi, w) in rule.nodes.iter().zip(&rule.weights) {
                let phi = basis_values(k, h, *xi);
                for a in 0..=k {
                    for b in 0..=k {
                        gram[a][b] += 0.5 * h * w * phi[a] * phi[b];
                    }
                }
            }
            for a in 0..=k {
                for b in 0..=k {
                    let expected = if a == b { 1.0 } else { 0.0 };
                    assert!((gram[a][b] - expected).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn evaluate_constants_and_zero() {
        let t = pipe();
        let s = DiscreteSpace::new(&build_graded(&t, 1e-2, 0.25, 2).unwrap(), &t, 2).unwrap();
        let zero = s.zeros();
        let one = s.project_pi_h(&t, |_, _, _| 1.0).unwrap();
        for x in [0.0, 0.1, 0.25, 0.9, 1.0] {
            for side in [Side::Left, Side::Right] {
                assert_eq!(s.evaluate(&zero, 0, x, side).unwrap(), 0.0);
                assert!((s.evaluate(&one, 0, x, side).unwrap() - 1.0).abs() < 1e-13);
            }
        }
        assert!(matches!(
            s.evaluate(&one, 0, 1.5, Side::Left),
            Err(Error::OutsideEdge { .. })
        ));
    }

    #[test]
    fn one_sided_limits_see_the_jump() {
        // piecewise linear x on [0, 1/2) and x + 1 on [1/2, 1]
        let t = pipe();
        let s = DiscreteSpace::new(&build_uniform(&t, 0.5).unwrap(), &t, 1).unwrap();
        let mut u = s.zeros();
        // element [a, a + h]: x = (a + h/2) + (h/2) xi; phi0 = 1/sqrt(h), phi1 = sqrt(3/h) xi
        let h: f64 = 0.5;
        for (elem, shift) in [(0usize, 0.0), (1, 1.0)] {
            let mid = 0.25 + 0.5 * elem as f64 + shift;
            u[2 * elem] = mid * h.sqrt();
            u[2 * elem + 1] = (h / 2.0) / (3.0 / h).sqrt();
        }
        let left = s.evaluate(&u, 0, 0.5, Side::Left).unwrap();
        let right = s.evaluate(&u, 0, 0.5, Side::Right).unwrap();
        assert!((left - 0.5).abs() < 1e-14);
        assert!((right - 1.5).abs() < 1e-14);
        assert!((right - left - 1.0).abs() < 1e-14);
    }

    #[test]
    fn projection_reproduces_polynomials_and_matches_outflow_values() {
        let t = pipe();
        for k in 1..4 {
            let s = DiscreteSpace::new(&build_graded(&t, 1e-2, 0.125, k).unwrap(), &t, k).unwrap();
            // element-wise polynomial with jumps
            let poly = |e: usize, x: f64, side: Side| {
                let _ = e;
                let shift = if x > 0.5 || (x == 0.5 && side == Side::Right) { 1.0 } else { 0.0 };
                shift + (1..=k).map(|p| (x - 0.3).powi(p as i32)).sum::<f64>()
            };
            let u = s.project_pi_h(&t, poly).unwrap();
            for (i, el) in s.elements().iter().enumerate() {
                for x in [el.x0 + 0.1 * el.width(), 0.5 * (el.x0 + el.x1), el.x1] {
                    let side = if x == el.x1 { Side::Left } else { Side::Right };
                    let exact = poly(0, x, side);
                    assert!((s.eval_element(&u, i, x) - exact).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn projection_is_idempotent_and_matches_endpoints() {
        let t = pipe();
        let s = DiscreteSpace::new(&build_uniform(&t, 0.125).unwrap(), &t, 2).unwrap();
        let f = |_: usize, x: f64, _: Side| (std::f64::consts::PI * x).sin() + x.exp();
        let u = s.project_pi_h(&t, f).unwrap();
        for (i, el) in s.elements().iter().enumerate() {
            assert!((s.eval_element(&u, i, el.x1) - f(0, el.x1, Side::Left)).abs() < 1e-14);
        }
        let again = s
            .project_pi_h(&t, |e, x, side| s.evaluate(&u, e, x, side).unwrap())
            .unwrap();
        for i in 0..s.bulk_dim() {
            assert!((again[i] - u[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_rejects_non_finite() {
        let t = pipe();
        let s = DiscreteSpace::new(&build_uniform(&t, 0.5).unwrap(), &t, 1).unwrap();
        let r = s.project_pi_h(&t, |_, x, _| 1.0 / (x - 0.25));
        assert!(r.is_ok() || matches!(r, Err(Error::NonFinite { .. })));
        let r = s.project_pi_h(&t, |_, _, _| f64::NAN);
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn refinement_preserves_function_and_norm() {
        let y = y_junction();
        let coarse_mesh = build_graded(&y, 1e-2, 0.25, 2).unwrap();
        let fine_mesh = coarse_mesh.refine_uniformly().refine_uniformly();
        let coarse = DiscreteSpace::new(&coarse_mesh, &y, 2).unwrap();
        let fine = DiscreteSpace::new(&fine_mesh, &y, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = CoefficientVector::from_vec((0..coarse.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let v = coarse.interpolate_to_refined(&u, &fine).unwrap();
        for _ in 0..100 {
            let e = rng.gen_range(0..3);
            let x = rng.gen_range(0.0..1.0);
            let a = coarse.evaluate(&u, e, x, Side::Right).unwrap();
            let b = fine.evaluate(&v, e, x, Side::Right).unwrap();
            assert!((a - b).abs() <= 1e-11 * a.abs().max(1.0), "{a} vs {b}");
        }
        let (nc, nf) = (coarse.l2_norm_quadrature(&u), fine.l2_norm_quadrature(&v));
        assert!((nc - nf).abs() <= 1e-13 * nc);
        assert!((coarse.l2_norm(&u) - nc).abs() <= 1e-13 * nc);
        // vertex hybrid copied
        let dv = coarse.vertex_dof(2).unwrap();
        assert_eq!(v[fine.vertex_dof(2).unwrap()], u[dv]);
    }

    #[test]
    fn refinement_requires_nesting() {
        let t = pipe();
        let a = DiscreteSpace::new(&build_uniform(&t, 1.0 / 3.0).unwrap(), &t, 1).unwrap();
        let b = DiscreteSpace::new(&build_uniform(&t, 0.25).unwrap(), &t, 1).unwrap();
        assert!(matches!(
            a.interpolate_to_refined(&a.zeros(), &b),
            Err(Error::NotNested(_))
        ));
    }

    #[test]
    fn snapshot_rows() {
        let t = pipe();
        let s = DiscreteSpace::new(&build_uniform(&t, 0.5).unwrap(), &t, 1).unwrap();
        let u = s.project_pi_h(&t, |_, _, _| 2.0).unwrap();
        let csv = s.snapshot_csv(&t, &[(1.0, &u)], 3, true);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 6);
        assert_eq!(lines[0], "time,edge_id,x,value");
        let fields: Vec<_> = lines[1].split(',').collect();
        assert_eq!(&fields[..3], &["1.0000000000000000e0", "e1", "0.0000000000000000e0"]);
        assert!((fields[3].parse::<f64>().unwrap() - 2.0).abs() < 1e-14);
    }
}
