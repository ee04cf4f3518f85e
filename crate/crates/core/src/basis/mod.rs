//! Polynomial bases on cells and edges, quadrature, and L2 projections.
//!
//! Cell functions use monomials of `(x - x_c) / h_T` and `(y - y_c) / h_T`
//! ordered by total degree, so `P_{r}` is always a prefix of `P_{k}` for
//! `r <= k`. Edge functions are Legendre polynomials in the arclength
//! coordinate mapped to `[-1, 1]`, measured from the lower-index endpoint.

pub mod quadrature;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Matrix2};

use crate::error::{Error, Result};
use crate::mesh::{EdgeSide, Mesh, Point};
use quadrature::{cell_quadrature, edge_quadrature, EdgePoint, Quadrature};

/// Quadrature degree used on cells and edges for order-`k` spaces.
pub fn quadrature_degree(k: usize) -> usize {
    2 * k + 2
}

/// `dim P_r` in two variables.
pub fn cell_dim(r: usize) -> usize {
    (r + 1) * (r + 2) / 2
}

/// `dim P_r` on an edge.
pub fn edge_dim(r: usize) -> usize {
    r + 1
}

/// Exponents `(a, b)` of the scaled monomials of total degree `<= r`.
pub fn exponents(r: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(cell_dim(r));
    for d in 0..=r {
        for a in (0..=d).rev() {
            out.push((a, d - a));
        }
    }
    out
}

fn monomial_index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + (d - a)
}

/// Scaled monomial basis of `P_r(T)` with its Gram matrix.
#[derive(Debug, Clone)]
pub struct CellBasis {
    pub cell: usize,
    pub order: usize,
    pub center: Point,
    pub scale: f64,
    exps: Vec<(usize, usize)>,
    gram: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl CellBasis {
    pub fn new(mesh: &Mesh, cell: usize, order: usize) -> Result<Self> {
        let quad = cell_quadrature(mesh, cell, 2 * order + 2);
        Self::with_quadrature(mesh, cell, order, &quad)
    }

    pub fn with_quadrature(
        mesh: &Mesh,
        cell: usize,
        order: usize,
        quad: &Quadrature<Point>,
    ) -> Result<Self> {
        let c = mesh.cell(cell);
        let exps = exponents(order);
        let n = exps.len();
        let mut basis = Self {
            cell,
            order,
            center: c.centroid,
            scale: c.diameter,
            exps,
            gram: DMatrix::zeros(n, n),
            chol: Cholesky::new(DMatrix::identity(1, 1)).unwrap(),
        };
        let mut gram = DMatrix::zeros(n, n);
        let mut vals = vec![0.0; n];
        for (x, w) in quad.iter() {
            basis.eval_into(x, &mut vals);
            for i in 0..n {
                for j in 0..n {
                    gram[(i, j)] += w * vals[i] * vals[j];
                }
            }
        }
        let chol = Cholesky::new(gram.clone()).ok_or_else(|| Error::BasisConditioning {
            cell,
            reason: "Gram matrix is not positive definite".into(),
        })?;
        let diag = chol.l_dirty().diagonal();
        let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
        if !(lo > 1e-7 * hi) {
            return Err(Error::BasisConditioning {
                cell,
                reason: format!("Gram matrix nearly singular (pivot ratio {:.2e})", lo / hi),
            });
        }
        basis.gram = gram;
        basis.chol = chol;
        Ok(basis)
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    pub fn exponents(&self) -> &[(usize, usize)] {
        &self.exps
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    fn local(&self, x: Point) -> (f64, f64) {
        ((x.x - self.center.x) / self.scale, (x.y - self.center.y) / self.scale)
    }

    pub fn eval_into(&self, x: Point, out: &mut [f64]) {
        let (u, v) = self.local(x);
        for (o, &(a, b)) in out.iter_mut().zip(&self.exps) {
            *o = u.powi(a as i32) * v.powi(b as i32);
        }
    }

    pub fn eval(&self, x: Point) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        self.eval_into(x, out.as_mut_slice());
        out
    }

    /// Gradients of all basis functions at `x`, as `(d/dx, d/dy)` columns.
    pub fn eval_grad_into(&self, x: Point, dx: &mut [f64], dy: &mut [f64]) {
        let (u, v) = self.local(x);
        let s = 1.0 / self.scale;
        for (i, &(a, b)) in self.exps.iter().enumerate() {
            dx[i] = if a == 0 { 0.0 } else { s * a as f64 * u.powi(a as i32 - 1) * v.powi(b as i32) };
            dy[i] = if b == 0 { 0.0 } else { s * b as f64 * u.powi(a as i32) * v.powi(b as i32 - 1) };
        }
    }

    pub fn eval_poly(&self, coeffs: &[f64], x: Point) -> f64 {
        let (u, v) = self.local(x);
        coeffs
            .iter()
            .zip(&self.exps)
            .map(|(c, &(a, b))| c * u.powi(a as i32) * v.powi(b as i32))
            .sum()
    }

    /// Solves `G c = rhs` with the cell Gram matrix.
    pub fn solve_gram(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(rhs)
    }

    pub fn solve_gram_matrix(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(rhs)
    }

    /// Coefficients of `(d/dx p, d/dy p)` in the same basis, by exact
    /// differentiation of the monomials.
    pub fn gradient_coefficients(&self, coeffs: &[f64]) -> (DVector<f64>, DVector<f64>) {
        let n = self.dim();
        let mut gx = DVector::zeros(n);
        let mut gy = DVector::zeros(n);
        let s = 1.0 / self.scale;
        for (c, &(a, b)) in coeffs.iter().zip(&self.exps) {
            if a > 0 {
                gx[monomial_index(a - 1, b)] += c * a as f64 * s;
            }
            if b > 0 {
                gy[monomial_index(a, b - 1)] += c * b as f64 * s;
            }
        }
        (gx, gy)
    }

    /// L2 projection of a scalar field onto this basis.
    pub fn project<F: Fn(Point) -> f64>(&self, quad: &Quadrature<Point>, f: F) -> DVector<f64> {
        let n = self.dim();
        let mut rhs = DVector::zeros(n);
        let mut vals = vec![0.0; n];
        for (x, w) in quad.iter() {
            self.eval_into(x, &mut vals);
            let fx = f(x);
            for i in 0..n {
                rhs[i] += w * fx * vals[i];
            }
        }
        self.solve_gram(&rhs)
    }
}

/// Legendre basis of `P_r(e)` in the arclength coordinate.
#[derive(Debug, Clone)]
pub struct EdgeBasis {
    pub edge: usize,
    pub order: usize,
    pub length: f64,
    gram: DMatrix<f64>,
}

impl EdgeBasis {
    pub fn new(mesh: &Mesh, edge: usize, order: usize) -> Self {
        let length = mesh.edge(edge).length;
        let quad = edge_quadrature(mesh, edge, 2 * order + 2);
        let mut b = Self { edge, order, length, gram: DMatrix::zeros(order + 1, order + 1) };
        let mut vals = vec![0.0; order + 1];
        let mut gram = DMatrix::zeros(order + 1, order + 1);
        for (p, w) in quad.iter() {
            b.eval_into(p.s, &mut vals);
            for i in 0..=order {
                for j in 0..=order {
                    gram[(i, j)] += w * vals[i] * vals[j];
                }
            }
        }
        b.gram = gram;
        b
    }

    pub fn dim(&self) -> usize {
        self.order + 1
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Values of all basis functions at arclength `s`.
    pub fn eval_into(&self, s: f64, out: &mut [f64]) {
        let t = 2.0 * s / self.length - 1.0;
        let mut p0 = 1.0;
        let mut p1 = t;
        for (j, o) in out.iter_mut().enumerate().take(self.order + 1) {
            *o = match j {
                0 => 1.0,
                1 => t,
                _ => {
                    let jf = j as f64;
                    let p2 = ((2.0 * jf - 1.0) * t * p1 - (jf - 1.0) * p0) / jf;
                    p0 = p1;
                    p1 = p2;
                    p2
                }
            };
        }
    }

    pub fn eval(&self, s: f64) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        self.eval_into(s, out.as_mut_slice());
        out
    }

    pub fn eval_poly(&self, coeffs: &[f64], s: f64) -> f64 {
        let v = self.eval(s);
        coeffs.iter().zip(v.iter()).map(|(c, b)| c * b).sum()
    }

    /// L2 projection of a scalar function of the edge point.
    pub fn project<F: Fn(EdgePoint) -> f64>(
        &self,
        quad: &Quadrature<EdgePoint>,
        f: F,
    ) -> DVector<f64> {
        let n = self.dim();
        let mut rhs = DVector::zeros(n);
        let mut vals = vec![0.0; n];
        for (p, w) in quad.iter() {
            self.eval_into(p.s, &mut vals);
            let fx = f(p);
            for i in 0..n {
                rhs[i] += w * fx * vals[i];
            }
        }
        // Legendre polynomials are orthogonal; the Gram matrix is diagonal
        // up to rounding, but a full solve keeps this exact for any basis.
        self.gram.clone().lu().solve(&rhs).expect("edge Gram matrix is SPD")
    }
}

/// Projection onto `P_r(T)` of a scalar field.
pub fn project_cell<F: Fn(Point) -> f64>(
    mesh: &Mesh,
    cell: usize,
    r: usize,
    quad_degree: usize,
    f: F,
) -> Result<DVector<f64>> {
    let quad = cell_quadrature(mesh, cell, quad_degree);
    let basis = CellBasis::with_quadrature(mesh, cell, r, &quad)?;
    Ok(basis.project(&quad, f))
}

/// Projection onto `[P_r(T)]^2` of a vector field; returns `(x, y)` coefficients.
pub fn project_cell_vector<F: Fn(Point) -> [f64; 2]>(
    mesh: &Mesh,
    cell: usize,
    r: usize,
    quad_degree: usize,
    f: F,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let quad = cell_quadrature(mesh, cell, quad_degree);
    let basis = CellBasis::with_quadrature(mesh, cell, r, &quad)?;
    Ok((basis.project(&quad, |x| f(x)[0]), basis.project(&quad, |x| f(x)[1])))
}

/// Edge polynomial vector stored in the `(n_e, t_e)` frame of its edge:
/// `v_b(s) = normal(s) n_e + tangential(s) t_e`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeVectorPoly {
    pub edge: usize,
    pub normal: DVector<f64>,
    pub tangential: DVector<f64>,
}

impl EdgeVectorPoly {
    pub fn eval(&self, mesh: &Mesh, basis: &EdgeBasis, s: f64) -> Point {
        let edge = mesh.edge(self.edge);
        edge.normal * basis.eval_poly(self.normal.as_slice(), s)
            + edge.tangent * basis.eval_poly(self.tangential.as_slice(), s)
    }
}

/// `Q_b(eps u . n) n + Q_b(n x (u x n))` on the edge of `side`, with `eps`
/// the coefficient of the cell on that side. The normal part does not
/// depend on the sign of `n`, so the result is expressed with `n_e`.
pub fn project_edge_vector<F: Fn(Point) -> [f64; 2]>(
    mesh: &Mesh,
    side: EdgeSide,
    order: usize,
    eps: &Matrix2<f64>,
    u: F,
) -> EdgeVectorPoly {
    let e = side.edge;
    let edge = mesh.edge(e);
    let quad = edge_quadrature(mesh, e, quadrature_degree(order));
    let basis = EdgeBasis::new(mesh, e, order);
    let (n, t) = (edge.normal, edge.tangent);
    let normal = basis.project(&quad, |p| {
        let v = u(p.x);
        let ev = eps * nalgebra::Vector2::new(v[0], v[1]);
        ev.dot(&n)
    });
    let tangential = basis.project(&quad, |p| {
        let v = u(p.x);
        v[0] * t.x + v[1] * t.y
    });
    EdgeVectorPoly { edge: e, normal, tangential }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Rect;
    use approx::assert_relative_eq;
    use nalgebra::Vector2;

    fn reference_triangle() -> Mesh {
        Mesh::from_cells(
            vec![Vector2::new(0.0, 0.0), Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)],
            vec![vec![0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn dimensions() {
        for k in 0..4 {
            assert_eq!(exponents(k).len(), cell_dim(k));
            for (i, &(a, b)) in exponents(k).iter().enumerate() {
                assert_eq!(monomial_index(a, b), i);
            }
        }
        let m = reference_triangle();
        assert_eq!(CellBasis::new(&m, 0, 3).unwrap().dim(), 10);
        assert_eq!(EdgeBasis::new(&m, 0, 3).dim(), 4);
    }

    #[test]
    fn gram_is_symmetric_positive_definite() {
        let m = Mesh::structured_triangulation(3, Rect::unit_square()).unwrap();
        for c in 0..m.num_cells() {
            let b = CellBasis::new(&m, c, 3).unwrap();
            let g = b.gram();
            assert_relative_eq!(g.clone(), g.transpose(), epsilon = 1e-15);
            let eig = g.clone().symmetric_eigen().eigenvalues;
            assert!(eig.min() > 0.0);
            // refinement independent conditioning of scaled monomials
            let cond = eig.max() / eig.min();
            assert!(cond < 1e6, "cond {cond}");
        }
        let eb = EdgeBasis::new(&m, 0, 3);
        assert!(eb.gram().clone().symmetric_eigen().eigenvalues.min() > 0.0);
    }

    #[test]
    fn projection_reproduces_polynomials() {
        let m = reference_triangle();
        let c = project_cell(&m, 0, 1, 4, |p| p.x + 2.0 * p.y).unwrap();
        let b = CellBasis::new(&m, 0, 1).unwrap();
        for p in [Vector2::new(0.1, 0.2), Vector2::new(0.7, 0.1)] {
            assert_relative_eq!(b.eval_poly(c.as_slice(), p), p.x + 2.0 * p.y, epsilon = 1e-13);
        }
        let z = project_cell(&m, 0, 2, 6, |_| 0.0).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }

    /// Normal equations for the P1 best approximation of x^2 on the
    /// reference triangle, in the plain monomial basis {1, x, y}:
    ///   G = [[1/2, 1/6, 1/6], [1/6, 1/12, 1/24], [1/6, 1/24, 1/12]]
    ///   f = [1/12, 1/20, 1/60]
    #[test]
    fn projection_of_x_squared_matches_hand_normal_equations() {
        let g = nalgebra::Matrix3::new(
            0.5, 1.0 / 6.0, 1.0 / 6.0,
            1.0 / 6.0, 1.0 / 12.0, 1.0 / 24.0,
            1.0 / 6.0, 1.0 / 24.0, 1.0 / 12.0,
        );
        let f = nalgebra::Vector3::new(1.0 / 12.0, 1.0 / 20.0, 1.0 / 60.0);
        let c = g.lu().solve(&f).unwrap();
        let m = reference_triangle();
        let proj = project_cell(&m, 0, 1, 4, |p| p.x * p.x).unwrap();
        let b = CellBasis::new(&m, 0, 1).unwrap();
        for p in [Vector2::new(0.0, 0.0), Vector2::new(0.3, 0.6), Vector2::new(1.0, 0.0)] {
            let hand = c[0] + c[1] * p.x + c[2] * p.y;
            assert_relative_eq!(b.eval_poly(proj.as_slice(), p), hand, epsilon = 1e-13);
        }
    }

    #[test]
    fn projection_is_idempotent() {
        let m = Mesh::structured_triangulation(2, Rect::unit_square()).unwrap();
        let quad = cell_quadrature(&m, 3, 8);
        let b = CellBasis::with_quadrature(&m, 3, 2, &quad).unwrap();
        let once = b.project(&quad, |p| (3.0 * p.x).sin() * p.y.exp());
        let twice = b.project(&quad, |p| b.eval_poly(once.as_slice(), p));
        assert_relative_eq!(once, twice, epsilon = 1e-13);
    }

    #[test]
    fn gradient_coefficients_are_exact() {
        let m = Mesh::structured_triangulation(2, Rect::new(1.0, 2.0, 2.0, 2.5)).unwrap();
        let b = CellBasis::new(&m, 5, 3).unwrap();
        let coeffs: Vec<f64> = (0..b.dim()).map(|i| 0.3 * i as f64 - 1.0).collect();
        let (gx, gy) = b.gradient_coefficients(&coeffs);
        let p = m.cell(5).centroid + Vector2::new(0.01, -0.02);
        let mut dx = vec![0.0; b.dim()];
        let mut dy = vec![0.0; b.dim()];
        b.eval_grad_into(p, &mut dx, &mut dy);
        let ex: f64 = coeffs.iter().zip(&dx).map(|(c, d)| c * d).sum();
        let ey: f64 = coeffs.iter().zip(&dy).map(|(c, d)| c * d).sum();
        assert_relative_eq!(b.eval_poly(gx.as_slice(), p), ex, epsilon = 1e-12);
        assert_relative_eq!(b.eval_poly(gy.as_slice(), p), ey, epsilon = 1e-12);
    }

    #[test]
    fn edge_vector_identity_coefficient_reassembles_u() {
        let m = Mesh::structured_triangulation(2, Rect::unit_square()).unwrap();
        for e in 0..m.num_edges() {
            let side = m.edge_sides(e)[0];
            let ev = project_edge_vector(&m, side, 1, &Matrix2::identity(), |_| [1.0, 2.0]);
            let basis = EdgeBasis::new(&m, e, 1);
            for s in [0.0, 0.3 * m.edge(e).length] {
                assert_relative_eq!(ev.eval(&m, &basis, s), Vector2::new(1.0, 2.0), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn edge_vector_scaled_normal_part() {
        let m = Mesh::structured_quadrilateral(1, Rect::unit_square()).unwrap();
        // the right edge x = 1 has n = (1, 0)
        let e = (0..m.num_edges())
            .find(|&e| (m.edge(e).normal - Vector2::new(1.0, 0.0)).norm() < 1e-14)
            .unwrap();
        let side = m.edge_sides(e)[0];
        let ev = project_edge_vector(&m, side, 2, &(2.0 * Matrix2::identity()), |_| [1.0, 0.0]);
        let basis = EdgeBasis::new(&m, e, 2);
        assert_relative_eq!(ev.eval(&m, &basis, 0.4), Vector2::new(2.0, 0.0), epsilon = 1e-14);
    }

    #[test]
    fn edge_vector_tangential_input_stays_tangential() {
        let m = Mesh::structured_triangulation(2, Rect::unit_square()).unwrap();
        let eps = 2.0 * Matrix2::identity();
        for e in 0..m.num_edges() {
            let t = m.edge(e).tangent;
            let side = m.edge_sides(e)[0];
            let ev = project_edge_vector(&m, side, 1, &eps, |p| {
                [t.x * (1.0 + p.x), t.y * (1.0 + p.x)]
            });
            assert!(ev.normal.iter().all(|v| v.abs() < 1e-14));
            assert!(ev.tangential.norm() > 0.0);
        }
    }
}
