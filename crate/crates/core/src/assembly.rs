//! Sparse HDG operators: mass, upwind convection, penalised diffusion and
//! the Nitsche-type boundary load.
//!
//! Hybrid values at boundary vertices are not unknowns. They are fixed by
//! the boundary data and enter only through the load vector.

use std::fmt::Write as _;

use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};
use crate::network::{BoundaryData, NetworkTopology};
use crate::quadrature::GaussLegendre;
use crate::space::{basis_derivatives, basis_values, DiscreteSpace};

pub type SparseMatrix = SparseColMat<usize, f64>;

/// Triplet accumulator; duplicates are summed in insertion order.
#[derive(Debug, Default)]
struct Builder {
    entries: Vec<Triplet<usize, usize, f64>>,
}

impl Builder {
    fn add(&mut self, row: usize, col: usize, value: f64) {
        self.entries.push(Triplet::new(row, col, value));
    }

    fn build(self, n: usize) -> SparseMatrix {
        SparseColMat::try_new_from_triplets(n, n, &self.entries)
            .expect("assembly indices are in range")
    }
}

/// One endpoint of an element as seen from inside it.
#[derive(Debug, Clone, Copy)]
struct Face {
    /// Outward normal, `-1` at the left end and `+1` at the right end.
    n: f64,
    hybrid: Option<usize>,
}

fn faces(space: &DiscreteSpace, elem: usize) -> [Face; 2] {
    let (left, right) = space.element_hybrids(elem);
    [
        Face {
            n: -1.0,
            hybrid: left,
        },
        Face {
            n: 1.0,
            hybrid: right,
        },
    ]
}

/// Basis values and derivatives at a face of an element of width `h`.
fn trace(k: usize, h: f64, face: &Face) -> (Vec<f64>, Vec<f64>) {
    (basis_values(k, h, face.n), basis_derivatives(k, h, face.n))
}

/// Identity on the bulk block, zero on the hybrid block.
pub fn assemble_mass(space: &DiscreteSpace) -> SparseMatrix {
    let mut m = Builder::default();
    for i in 0..space.bulk_dim() {
        m.add(i, i, 1.0);
    }
    m.build(space.dim())
}

/// Diagonal of the mass matrix as a dense vector.
pub fn mass_diagonal(space: &DiscreteSpace) -> Vec<f64> {
    (0..space.dim())
        .map(|i| if i < space.bulk_dim() { 1.0 } else { 0.0 })
        .collect()
}

/// Upwind convection operator.
pub fn assemble_convection(space: &DiscreteSpace, topology: &NetworkTopology) -> SparseMatrix {
    let k = space.k();
    let rule = GaussLegendre::new(k + 1);
    let mut a = Builder::default();
    for (elem, el) in space.elements().iter().enumerate() {
        let b = topology.edge(el.edge).velocity;
        let h = el.width();
        let o = space.bulk_offset(elem);
        // -(b u, w')
        for (xi, wq) in rule.nodes.iter().zip(&rule.weights) {
            let phi = basis_values(k, h, *xi);
            let dphi = basis_derivatives(k, h, *xi);
            let jac = 0.5 * h * wq;
            for i in 0..=k {
                for j in 0..=k {
                    a.add(o + i, o + j, -b * jac * phi[j] * dphi[i]);
                }
            }
        }
        // <n b u_up, w - w_hat>
        for face in faces(space, elem) {
            let nb = face.n * b;
            let phi = basis_values(k, h, face.n);
            if nb > 0.0 {
                for i in 0..=k {
                    for j in 0..=k {
                        a.add(o + i, o + j, nb * phi[j] * phi[i]);
                    }
                }
                if let Some(hat) = face.hybrid {
                    for j in 0..=k {
                        a.add(hat, o + j, -nb * phi[j]);
                    }
                }
            } else if let Some(hat) = face.hybrid {
                for i in 0..=k {
                    a.add(o + i, hat, nb * phi[i]);
                }
                a.add(hat, hat, -nb);
            }
        }
    }
    a.build(space.dim())
}

/// Diffusion operator with jump penalty `alpha / h_T`.
pub fn assemble_diffusion(space: &DiscreteSpace, alpha: f64) -> SparseMatrix {
    let k = space.k();
    let rule = GaussLegendre::new(k + 1);
    let mut a = Builder::default();
    for (elem, el) in space.elements().iter().enumerate() {
        let h = el.width();
        let o = space.bulk_offset(elem);
        let pen = alpha / h;
        for (xi, wq) in rule.nodes.iter().zip(&rule.weights) {
            let dphi = basis_derivatives(k, h, *xi);
            let jac = 0.5 * h * wq;
            for i in 0..=k {
                for j in 0..=k {
                    a.add(o + i, o + j, jac * dphi[j] * dphi[i]);
                }
            }
        }
        for face in faces(space, elem) {
            let n = face.n;
            let (phi, dphi) = trace(k, h, &face);
            for i in 0..=k {
                for j in 0..=k {
                    let v = -n * dphi[j] * phi[i] + n * phi[j] * dphi[i] + pen * phi[j] * phi[i];
                    a.add(o + i, o + j, v);
                }
            }
            if let Some(hat) = face.hybrid {
                for i in 0..=k {
                    a.add(o + i, hat, -n * dphi[i] - pen * phi[i]);
                    a.add(hat, o + i, n * dphi[i] - pen * phi[i]);
                }
                a.add(hat, hat, pen);
            }
        }
    }
    a.build(space.dim())
}

/// `B + eps D`. For `eps = 0` this is a copy of `B`, so the vanishing
/// diffusion operator is exactly the transport operator.
pub fn combine(b: &SparseMatrix, d: &SparseMatrix, eps: f64) -> SparseMatrix {
    if eps == 0.0 {
        return b.clone();
    }
    let n = b.nrows();
    let mut a = Builder::default();
    for (i, j, v) in entries(b) {
        a.add(i, j, v);
    }
    for (i, j, v) in entries(d) {
        a.add(i, j, eps * v);
    }
    a.build(n)
}

/// Stored entries `(row, col, value)` in column-major order.
pub fn entries(a: &SparseMatrix) -> Vec<(usize, usize, f64)> {
    let sym = a.symbolic();
    let (col_ptr, row_idx, val) = (sym.col_ptr(), sym.row_idx(), a.val());
    let mut out = Vec::with_capacity(val.len());
    for j in 0..a.ncols() {
        for p in col_ptr[j]..col_ptr[j + 1] {
            out.push((row_idx[p], j, val[p]));
        }
    }
    out
}

/// `A x`.
pub fn apply(a: &SparseMatrix, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.nrows()];
    for (i, j, v) in entries(a) {
        y[i] += v * x[j];
    }
    y
}

/// `x^T A x`.
pub fn quadratic_form(a: &SparseMatrix, x: &[f64]) -> f64 {
    apply(a, x).iter().zip(x).map(|(y, x)| y * x).sum()
}

/// Coordinate dump, one `row col value` line per stored entry.
pub fn triplet_dump(a: &SparseMatrix) -> String {
    let mut out = String::new();
    for (i, j, v) in entries(a) {
        let _ = writeln!(out, "{i} {j} {v:.16e}");
    }
    out
}

/// Load contributions of a single boundary vertex for unit data.
#[derive(Debug, Clone)]
pub struct VertexLoad {
    pub vertex: usize,
    /// Inflow convective term, empty at outflow vertices.
    pub convective: Vec<(usize, f64)>,
    /// Terms carrying a factor `eps`.
    pub diffusive: Vec<(usize, f64)>,
}

/// Per-vertex load vectors for unit boundary data.
pub fn vertex_loads(space: &DiscreteSpace, topology: &NetworkTopology, alpha: f64) -> Vec<VertexLoad> {
    let k = space.k();
    let mut loads = Vec::new();
    for v in 0..topology.vertex_count() {
        if !topology.is_boundary(v) {
            continue;
        }
        let e = topology.incident_edges(v)[0];
        let edge = topology.edge(e);
        let range = space.edge_elements(e);
        let (elem, face) = if edge.head == v {
            (range.end - 1, 1)
        } else {
            (range.start, 0)
        };
        let el = space.element(elem);
        let h = el.width();
        let f = faces(space, elem)[face];
        let (phi, dphi) = trace(k, h, &f);
        let o = space.bulk_offset(elem);
        let nb = f.n * edge.velocity;
        let convective = if nb < 0.0 {
            (0..=k).map(|i| (o + i, -nb * phi[i])).collect()
        } else {
            Vec::new()
        };
        let diffusive = (0..=k)
            .map(|i| (o + i, f.n * dphi[i] + alpha / h * phi[i]))
            .collect();
        loads.push(VertexLoad {
            vertex: v,
            convective,
            diffusive,
        });
    }
    loads
}

/// Load vector at time `t` for boundary data `boundary`.
pub fn assemble_load(
    space: &DiscreteSpace,
    topology: &NetworkTopology,
    boundary: &BoundaryData,
    eps: f64,
    alpha: f64,
    t: f64,
) -> Vec<f64> {
    let mut out = vec![0.0; space.dim()];
    accumulate_load(&vertex_loads(space, topology, alpha), boundary, eps, t, &mut out);
    out
}

fn accumulate_load(loads: &[VertexLoad], boundary: &BoundaryData, eps: f64, t: f64, out: &mut [f64]) {
    for load in loads {
        let g = boundary.value(load.vertex, t);
        if g == 0.0 {
            continue;
        }
        for &(i, v) in &load.convective {
            out[i] += g * v;
        }
        if eps != 0.0 {
            for &(i, v) in &load.diffusive {
                out[i] += eps * g * v;
            }
        }
    }
}

/// Assembled operators of one discretisation, reusable across `eps`.
#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    space: DiscreteSpace,
    alpha: f64,
    mass: Vec<f64>,
    convection: SparseMatrix,
    diffusion: SparseMatrix,
    loads: Vec<VertexLoad>,
}

impl DiscreteSystem {
    pub fn new(space: DiscreteSpace, topology: &NetworkTopology, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Config(format!("stabilisation must be positive, got {alpha}")));
        }
        Ok(Self {
            mass: mass_diagonal(&space),
            convection: assemble_convection(&space, topology),
            diffusion: assemble_diffusion(&space, alpha),
            loads: vertex_loads(&space, topology, alpha),
            space,
            alpha,
        })
    }

    pub fn space(&self) -> &DiscreteSpace {
        &self.space
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mass_diagonal(&self) -> &[f64] {
        &self.mass
    }

    pub fn convection(&self) -> &SparseMatrix {
        &self.convection
    }

    pub fn diffusion(&self) -> &SparseMatrix {
        &self.diffusion
    }

    pub fn operator(&self, eps: f64) -> SparseMatrix {
        combine(&self.convection, &self.diffusion, eps)
    }

    pub fn vertex_loads(&self) -> &[VertexLoad] {
        &self.loads
    }

    pub fn load(&self, boundary: &BoundaryData, eps: f64, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.space.dim()];
        accumulate_load(&self.loads, boundary, eps, t, &mut out);
        out
    }

    /// Largest hybrid-row residual of `K u = l(t)`, each row scaled by
    /// `sum_j |K_ij u_j| + |l_i|` so cancellation in large rows is not
    /// mistaken for an error.
    pub fn relative_hybrid_residual(&self, operator: &SparseMatrix, boundary: &BoundaryData, eps: f64, t: f64, u: &[f64]) -> f64 {
        let n = self.space.dim();
        let (mut ku, mut scale) = (vec![0.0; n], vec![0.0; n]);
        for (i, j, v) in entries(operator) {
            ku[i] += v * u[j];
            scale[i] += (v * u[j]).abs();
        }
        let l = self.load(boundary, eps, t);
        (self.space.bulk_dim()..n)
            .map(|i| {
                let s = scale[i] + l[i].abs();
                if s == 0.0 {
                    0.0
                } else {
                    (ku[i] - l[i]).abs() / s
                }
            })
            .fold(0.0, f64::max)
    }

    /// `K u - l(t)` restricted to the hybrid rows.
    pub fn hybrid_residual(&self, operator: &SparseMatrix, boundary: &BoundaryData, eps: f64, t: f64, u: &[f64]) -> f64 {
        let ku = apply(operator, u);
        let l = self.load(boundary, eps, t);
        (self.space.bulk_dim()..self.space.dim())
            .map(|i| (ku[i] - l[i]).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_graded, build_uniform};
    use crate::network::TimeProfile;
    use crate::space::CoefficientVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pipe(b: f64) -> NetworkTopology {
        NetworkTopology::new(&["v1", "v2"], &[("e1", "v1", "v2", 1.0, b)]).unwrap()
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

    fn dense(a: &SparseMatrix) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; a.ncols()]; a.nrows()];
        for (i, j, v) in entries(a) {
            m[i][j] += v;
        }
        m
    }

    /// Trace of the discrete function on face `f` of element `elem`.
    fn face_x(space: &DiscreteSpace, elem: usize, face: &Face) -> f64 {
        let el = space.element(elem);
        if face.n < 0.0 {
            el.x0
        } else {
            el.x1
        }
    }

    fn face_jump(space: &DiscreteSpace, u: &[f64], elem: usize, face: &Face) -> f64 {
        let cv = CoefficientVector::from_vec(u.to_vec());
        let inner = space.eval_element(&cv, elem, face_x(space, elem, face));
        inner - face.hybrid.map_or(0.0, |d| u[d])
    }

    /// Per-row scale `sum_j |a_ij x_j|` for cancellation-aware tolerances.
    fn row_scale(a: &SparseMatrix, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; a.nrows()];
        for (i, j, v) in entries(a) {
            y[i] += (v * x[j]).abs();
        }
        y
    }

    fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn mass_is_identity_on_bulk() {
        let t = pipe(1.0);
        let s = DiscreteSpace::new(&build_uniform(&t, 0.5).unwrap(), &t, 1).unwrap();
        let m = dense(&assemble_mass(&s));
        assert_eq!(s.dim(), 5);
        for i in 0..5 {
            for j in 0..5 {
                let expected = if i == j && i < 4 { 1.0 } else { 0.0 };
                assert_eq!(m[i][j], expected);
            }
        }
    }

    #[test]
    fn single_element_convection_by_hand() {
        // one element [0, h], k = 1; phi0 = 1/sqrt(h), phi1 = sqrt(3/h) xi
        for (b, h) in [(1.0, 1.0), (2.5, 1.0)] {
            let t = pipe(b);
            let s = DiscreteSpace::new(&build_uniform(&t, h).unwrap(), &t, 1).unwrap();
            let m = dense(&assemble_convection(&s, &t));
            let r3 = 3f64.sqrt();
            let expected = [[b / h, b / h * r3], [-b / h * r3, 3.0 * b / h]];
            for i in 0..2 {
                for j in 0..2 {
                    assert!((m[i][j] - expected[i][j]).abs() < 1e-14, "{i}{j}: {}", m[i][j]);
                }
            }
        }
    }

    #[test]
    fn two_element_convection_couples_through_the_hybrid() {
        // [0, 1/2] and [1/2, 1], b = 1, k = 1: dof 4 is the midpoint hybrid
        let t = pipe(1.0);
        let s = DiscreteSpace::new(&build_uniform(&t, 0.5).unwrap(), &t, 1).unwrap();
        let m = dense(&assemble_convection(&s, &t));
        let h: f64 = 0.5;
        let (p0, p1) = (1.0 / h.sqrt(), (3.0 / h).sqrt());
        // hybrid row: -b u_left(1/2) + b u_hat
        assert!((m[4][0] + p0).abs() < 1e-14);
        assert!((m[4][1] + p1).abs() < 1e-14);
        assert!((m[4][4] - 1.0).abs() < 1e-14);
        // second element bulk rows pick up -b w(1/2) u_hat
        assert!((m[2][4] + p0).abs() < 1e-14);
        assert!((m[3][4] - p1).abs() < 1e-14);
        assert_eq!(m[0][4], 0.0);
        assert_eq!(m[1][4], 0.0);
    }

    #[test]
    fn convection_ellipticity_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in [pipe(1.3), y_junction()] {
            for k in [1, 2] {
                for graded in [false, true] {
                    let mesh = if graded {
                        build_graded(&t, 1e-3, 0.25, k).unwrap()
                    } else {
                        build_uniform(&t, 0.25).unwrap()
                    };
                    let s = DiscreteSpace::new(&mesh, &t, k).unwrap();
                    let b = assemble_convection(&s, &t);
                    for _ in 0..20 {
                        let u = random_vector(&mut rng, s.dim());
                        let lhs = quadratic_form(&b, &u);
                        let mut rhs = 0.0;
                        for elem in 0..s.elements().len() {
                            let vel = t.edge(s.element(elem).edge).velocity;
                            for f in faces(&s, elem) {
                                rhs += 0.5 * vel * face_jump(&s, &u, elem, &f).powi(2);
                            }
                        }
                        assert!((lhs - rhs).abs() <= 1e-10 * rhs, "{lhs} vs {rhs}");
                    }
                }
            }
        }
    }

    #[test]
    fn diffusion_stability_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = y_junction();
        for k in [1, 2, 3] {
            let s = DiscreteSpace::new(&build_graded(&t, 1e-2, 0.25, k).unwrap(), &t, k).unwrap();
            let alpha = 1.7;
            let d = assemble_diffusion(&s, alpha);
            let rule = GaussLegendre::new(k + 2);
            for _ in 0..20 {
                let u = random_vector(&mut rng, s.dim());
                let cv = CoefficientVector::from_vec(u.clone());
                let mut rhs = 0.0;
                for (elem, el) in s.elements().iter().enumerate() {
                    rhs += rule
                        .on_interval(el.x0, el.x1)
                        .map(|(x, w)| w * s.eval_element_derivative(&cv, elem, x).powi(2))
                        .sum::<f64>();
                    for f in faces(&s, elem) {
                        rhs += alpha / el.width() * face_jump(&s, &u, elem, &f).powi(2);
                    }
                }
                let lhs = quadratic_form(&d, &u);
                assert!((lhs - rhs).abs() <= 1e-10 * rhs, "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn diffusion_skew_part_is_the_consistency_coupling() {
        // d(u, w) - d(w, u) = 2 <n (u - u_hat), w'> - 2 <n u', w - w_hat>
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = y_junction();
        let s = DiscreteSpace::new(&build_graded(&t, 1e-2, 0.25, 2).unwrap(), &t, 2).unwrap();
        let d = assemble_diffusion(&s, 1.0);
        for _ in 0..20 {
            let u = random_vector(&mut rng, s.dim());
            let w = random_vector(&mut rng, s.dim());
            let (cu, cw) = (CoefficientVector::from_vec(u.clone()), CoefficientVector::from_vec(w.clone()));
            let lhs = apply(&d, &u).iter().zip(&w).map(|(a, b)| a * b).sum::<f64>()
                - apply(&d, &w).iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
            let mut rhs = 0.0;
            for elem in 0..s.elements().len() {
                for f in faces(&s, elem) {
                    let x = face_x(&s, elem, &f);
                    let du = s.eval_element_derivative(&cu, elem, x);
                    let dw = s.eval_element_derivative(&cw, elem, x);
                    rhs += 2.0 * f.n * (face_jump(&s, &u, elem, &f) * dw - du * face_jump(&s, &w, elem, &f));
                }
            }
            assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn constants_lie_in_the_kernels() {
        let t = y_junction();
        let s = DiscreteSpace::new(&build_graded(&t, 1e-2, 0.25, 2).unwrap(), &t, 2).unwrap();
        let c = s.constant(3.0);
        let d = assemble_diffusion(&s, 1.0);
        let dc = apply(&d, c.as_slice());
        let d_scale = row_scale(&d, c.as_slice());
        // only boundary faces see a nonzero jump to the absent hybrid
        let mut boundary_rows = vec![false; s.dim()];
        for l in vertex_loads(&s, &t, 1.0) {
            for (i, _) in l.diffusive {
                boundary_rows[i] = true;
            }
        }
        for (i, v) in dc.iter().enumerate() {
            if !boundary_rows[i] {
                assert!(v.abs() <= 1e-13 * d_scale[i], "row {i}: {v}");
            }
        }
        let b = assemble_convection(&s, &t);
        let bc = apply(&b, c.as_slice());
        let b_scale = row_scale(&b, c.as_slice());
        for (i, v) in bc.iter().enumerate() {
            if !boundary_rows[i] {
                assert!(v.abs() <= 1e-13 * b_scale[i], "row {i}: {v}");
            }
        }
    }

    #[test]
    fn constant_state_solves_the_stationary_system() {
        let t = y_junction();
        let c = 2.5;
        let mut g = BoundaryData::zeros(&t);
        for v in 0..t.vertex_count() {
            if t.is_boundary(v) {
                g.set(&t, v, TimeProfile::ramp(c, 1, 0.25)).unwrap();
            }
        }
        for eps in [0.0f64, 1e-2, 1.0] {
            let s = DiscreteSpace::new(&build_graded(&t, eps.max(1e-3), 0.25, 2).unwrap(), &t, 2).unwrap();
            let u = s.constant(c);
            let sys = DiscreteSystem::new(s, &t, 1.0).unwrap();
            let k = sys.operator(eps);
            let r = apply(&k, u.as_slice());
            let scale = row_scale(&k, u.as_slice());
            let l = sys.load(&g, eps, 0.5);
            for ((a, b), s) in r.iter().zip(&l).zip(&scale) {
                assert!((a - b).abs() <= 1e-13 * s.max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn zero_eps_operator_is_the_transport_operator() {
        let t = y_junction();
        let s = DiscreteSpace::new(&build_uniform(&t, 0.125).unwrap(), &t, 2).unwrap();
        let sys = DiscreteSystem::new(s.clone(), &t, 1.0).unwrap();
        let transport = assemble_convection(&s, &t);
        let a = entries(&sys.operator(0.0));
        let b = entries(&transport);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.0, x.1), (y.0, y.1));
            assert_eq!(x.2.to_bits(), y.2.to_bits());
        }
    }

    #[test]
    fn load_support_and_hand_value() {
        let t = pipe(1.0);
        let s = DiscreteSpace::new(&build_uniform(&t, 1.0).unwrap(), &t, 1).unwrap();
        let mut g = BoundaryData::zeros(&t);
        assert!(assemble_load(&s, &t, &g, 0.1, 1.0, 0.5).iter().all(|&v| v == 0.0));
        g.set(&t, 0, TimeProfile::ramp(1.0, 1, 0.25)).unwrap();
        // eps = 0: +1 times the basis values at x = 0
        let l = assemble_load(&s, &t, &g, 0.0, 1.0, 0.5);
        assert!((l[0] - 1.0).abs() < 1e-14);
        assert!((l[1] + 3f64.sqrt()).abs() < 1e-14);
        // outflow data only enters with eps
        let mut out = BoundaryData::zeros(&t);
        out.set(&t, 1, TimeProfile::ramp(1.0, 1, 0.25)).unwrap();
        assert!(assemble_load(&s, &t, &out, 0.0, 1.0, 0.5).iter().all(|&v| v == 0.0));
        assert!(assemble_load(&s, &t, &out, 0.1, 1.0, 0.5).iter().any(|&v| v != 0.0));
    }

    #[test]
    fn triplet_dump_lists_entries() {
        let t = pipe(1.0);
        let s = DiscreteSpace::new(&build_uniform(&t, 1.0).unwrap(), &t, 1).unwrap();
        let dump = triplet_dump(&assemble_mass(&s));
        assert_eq!(dump.lines().count(), 2);
        assert!(dump.starts_with("0 0 1.0000000000000000e0"));
    }

    #[test]
    fn rejects_bad_alpha() {
        let t = pipe(1.0);
        let s = DiscreteSpace::new(&build_uniform(&t, 1.0).unwrap(), &t, 1).unwrap();
        assert!(DiscreteSystem::new(s, &t, 0.0).is_err());
    }
}
