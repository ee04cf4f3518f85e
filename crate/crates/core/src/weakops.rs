//! Discrete weak divergence and weak curl on one cell.
//!
//! A local weak function stores `v_0 in [P_k(T)]^2` followed by, for each
//! local edge in cell order, the edge polynomial `v_b` in the `(n_e, t_e)`
//! frame: `k + 1` normal coefficients, then `k + 1` tangential ones. With
//! `n = sign * n_e` the cell-outward normal this gives `v_b . n = sign * a`
//! and `v_b x n = -sign * b` for normal part `a` and tangential part `b`.
//!
//! In 2D the curl of a vector is the scalar `dx v_2 - dy v_1`, the curl of
//! a scalar `phi` is `(dy phi, -dx phi)`, and `v x n = v_1 n_2 - v_2 n_1`.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::basis::quadrature::{cell_quadrature, edge_quadrature, EdgePoint, Quadrature};
use crate::basis::{cell_dim, edge_dim, quadrature_degree, CellBasis, EdgeBasis};
use crate::error::Result;
use crate::mesh::{EdgeSide, Mesh, Point};

/// Index layout of the local coefficient vector on one cell.
#[derive(Debug, Clone)]
pub struct LocalLayout {
    pub cell: usize,
    pub k: usize,
    pub n_cell: usize,
    pub n_edge: usize,
    pub edges: Vec<EdgeSide>,
}

impl LocalLayout {
    pub fn new(mesh: &Mesh, cell: usize, k: usize) -> Self {
        let c = mesh.cell(cell);
        let edges = c
            .edges
            .iter()
            .zip(&c.signs)
            .map(|(&edge, &sign)| EdgeSide { edge, cell, sign })
            .collect();
        Self { cell, k, n_cell: cell_dim(k), n_edge: edge_dim(k), edges }
    }

    pub fn len(&self) -> usize {
        2 * self.n_cell + 2 * self.n_edge * self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Component `comp` (0 = x, 1 = y) of `v_0`, basis function `i`.
    pub fn v0(&self, comp: usize, i: usize) -> usize {
        comp * self.n_cell + i
    }

    pub fn normal(&self, j: usize, i: usize) -> usize {
        2 * self.n_cell + 2 * self.n_edge * j + i
    }

    pub fn tangential(&self, j: usize, i: usize) -> usize {
        self.normal(j, i) + self.n_edge
    }
}

/// A weak function restricted to one cell, real coefficients in the
/// [`LocalLayout`] order.
#[derive(Debug, Clone)]
pub struct WeakFunctionLocal {
    pub layout: LocalLayout,
    pub coeffs: DVector<f64>,
}

impl WeakFunctionLocal {
    pub fn zeros(layout: LocalLayout) -> Self {
        let n = layout.len();
        Self { layout, coeffs: DVector::zeros(n) }
    }

    /// `v_0 = Q_0 f` and `v_b = Q_b g` with `g` expressed in each edge frame.
    pub fn from_fields<F, G>(mesh: &Mesh, layout: LocalLayout, v0: F, vb: G) -> Result<Self>
    where
        F: Fn(Point) -> Vector2<f64>,
        G: Fn(usize, Point) -> Vector2<f64>,
    {
        let k = layout.k;
        let quad = cell_quadrature(mesh, layout.cell, quadrature_degree(k));
        let basis = CellBasis::with_quadrature(mesh, layout.cell, k, &quad)?;
        let mut out = Self::zeros(layout);
        let px = basis.project(&quad, |x| v0(x).x);
        let py = basis.project(&quad, |x| v0(x).y);
        let l = out.layout.clone();
        for i in 0..l.n_cell {
            out.coeffs[l.v0(0, i)] = px[i];
            out.coeffs[l.v0(1, i)] = py[i];
        }
        for (j, side) in l.edges.iter().enumerate() {
            let edge = mesh.edge(side.edge);
            let eq = edge_quadrature(mesh, side.edge, quadrature_degree(k));
            let eb = EdgeBasis::new(mesh, side.edge, k);
            let a = eb.project(&eq, |p| vb(side.edge, p.x).dot(&edge.normal));
            let b = eb.project(&eq, |p| vb(side.edge, p.x).dot(&edge.tangent));
            for i in 0..l.n_edge {
                out.coeffs[l.normal(j, i)] = a[i];
                out.coeffs[l.tangential(j, i)] = b[i];
            }
        }
        Ok(out)
    }

    /// `Q_h w = {Q_0 w, Q_b(C w . n) n + Q_b(n x (w x n))}` with the cell's
    /// own coefficient `C` on every edge.
    pub fn interpolate<F>(mesh: &Mesh, layout: LocalLayout, c: &Matrix2<f64>, w: F) -> Result<Self>
    where
        F: Fn(Point) -> Vector2<f64>,
    {
        let mut out = Self::from_fields(mesh, layout, &w, |_, x| w(x))?;
        let l = out.layout.clone();
        for (j, side) in l.edges.iter().enumerate() {
            let ev = crate::basis::project_edge_vector(mesh, *side, l.k, c, |x| {
                let v = w(x);
                [v.x, v.y]
            });
            for i in 0..l.n_edge {
                out.coeffs[l.normal(j, i)] = ev.normal[i];
            }
        }
        Ok(out)
    }
}

/// Quadrature rules and bases shared by all operators on one cell.
pub struct CellContext {
    pub layout: LocalLayout,
    pub quad: Quadrature<Point>,
    pub basis: CellBasis,
    pub edge_quads: Vec<Quadrature<EdgePoint>>,
    pub edge_bases: Vec<EdgeBasis>,
}

impl CellContext {
    pub fn new(mesh: &Mesh, cell: usize, k: usize) -> Result<Self> {
        let layout = LocalLayout::new(mesh, cell, k);
        let deg = quadrature_degree(k);
        let quad = cell_quadrature(mesh, cell, deg);
        let basis = CellBasis::with_quadrature(mesh, cell, k, &quad)?;
        let edge_quads = layout.edges.iter().map(|s| edge_quadrature(mesh, s.edge, deg)).collect();
        let edge_bases = layout.edges.iter().map(|s| EdgeBasis::new(mesh, s.edge, k)).collect();
        Ok(Self { layout, quad, basis, edge_quads, edge_bases })
    }

    fn test_basis(&self, mesh: &Mesh, r: usize) -> Result<CellBasis> {
        CellBasis::with_quadrature(mesh, self.layout.cell, r, &self.quad)
    }

    /// Unsolved weak divergence: row `l` holds
    /// `-(C v_0, grad phi_l) + <v_b . n, phi_l>` as a linear form in the
    /// local coefficients.
    pub fn divergence_rhs(&self, mesh: &Mesh, r: usize, c: &Matrix2<f64>) -> Result<DMatrix<f64>> {
        let test = self.test_basis(mesh, r)?;
        let l = &self.layout;
        let nr = test.dim();
        let mut out = DMatrix::zeros(nr, l.len());
        let mut m = vec![0.0; l.n_cell];
        let mut dx = vec![0.0; nr];
        let mut dy = vec![0.0; nr];
        for (x, w) in self.quad.iter() {
            self.basis.eval_into(x, &mut m);
            test.eval_grad_into(x, &mut dx, &mut dy);
            for t in 0..nr {
                let cx = c[(0, 0)] * dx[t] + c[(1, 0)] * dy[t];
                let cy = c[(0, 1)] * dx[t] + c[(1, 1)] * dy[t];
                for a in 0..l.n_cell {
                    out[(t, l.v0(0, a))] -= w * m[a] * cx;
                    out[(t, l.v0(1, a))] -= w * m[a] * cy;
                }
            }
        }
        self.edge_moments(&test, |j, i| l.normal(j, i), &mut out);
        Ok(out)
    }

    /// Unsolved weak curl: row `l` holds `(v_0, curl phi_l) - <v_b x n, phi_l>`.
    pub fn curl_rhs(&self, mesh: &Mesh, r: usize) -> Result<DMatrix<f64>> {
        let test = self.test_basis(mesh, r)?;
        let l = &self.layout;
        let nr = test.dim();
        let mut out = DMatrix::zeros(nr, l.len());
        let mut m = vec![0.0; l.n_cell];
        let mut dx = vec![0.0; nr];
        let mut dy = vec![0.0; nr];
        for (x, w) in self.quad.iter() {
            self.basis.eval_into(x, &mut m);
            test.eval_grad_into(x, &mut dx, &mut dy);
            for t in 0..nr {
                for a in 0..l.n_cell {
                    out[(t, l.v0(0, a))] += w * m[a] * dy[t];
                    out[(t, l.v0(1, a))] -= w * m[a] * dx[t];
                }
            }
        }
        self.edge_moments(&test, |j, i| l.tangential(j, i), &mut out);
        Ok(out)
    }

    /// Adds `sign * <psi_i, phi_t>_e` at column `col(j, i)` for every edge.
    fn edge_moments<F: Fn(usize, usize) -> usize>(
        &self,
        test: &CellBasis,
        col: F,
        out: &mut DMatrix<f64>,
    ) {
        let nr = test.dim();
        let ne = self.layout.n_edge;
        let mut phi = vec![0.0; nr];
        let mut psi = vec![0.0; ne];
        for (j, side) in self.layout.edges.iter().enumerate() {
            for (p, w) in self.edge_quads[j].iter() {
                test.eval_into(p.x, &mut phi);
                self.edge_bases[j].eval_into(p.s, &mut psi);
                for t in 0..nr {
                    for i in 0..ne {
                        out[(t, col(j, i))] += side.sign * w * psi[i] * phi[t];
                    }
                }
            }
        }
    }

    /// `h_T^{-1} sum_e <N(v), N(w)>_e` with `N(v) = (C v_0 - v_b) . n`.
    pub fn stabilizer_normal(&self, mesh: &Mesh, c: &Matrix2<f64>) -> DMatrix<f64> {
        let l = &self.layout;
        self.edge_penalty(mesh, |j, side, m, psi, row| {
            let n = mesh.edge(side.edge).normal * side.sign;
            let cn = c * n;
            for a in 0..l.n_cell {
                row[l.v0(0, a)] = m[a] * cn.x;
                row[l.v0(1, a)] = m[a] * cn.y;
            }
            for i in 0..l.n_edge {
                row[l.normal(j, i)] = -side.sign * psi[i];
            }
        })
    }

    /// `h_T^{-1} sum_e <T(v), T(w)>_e` with `T(v) = (v_0 - v_b) x n`.
    pub fn stabilizer_tangential(&self, mesh: &Mesh) -> DMatrix<f64> {
        let l = &self.layout;
        self.edge_penalty(mesh, |j, side, m, psi, row| {
            let n = mesh.edge(side.edge).normal * side.sign;
            for a in 0..l.n_cell {
                row[l.v0(0, a)] = m[a] * n.y;
                row[l.v0(1, a)] = -m[a] * n.x;
            }
            for i in 0..l.n_edge {
                row[l.tangential(j, i)] = side.sign * psi[i];
            }
        })
    }

    fn edge_penalty<F>(&self, mesh: &Mesh, fill: F) -> DMatrix<f64>
    where
        F: Fn(usize, &EdgeSide, &[f64], &[f64], &mut [f64]),
    {
        let l = &self.layout;
        let n = l.len();
        let h_inv = 1.0 / mesh.cell(l.cell).diameter;
        let mut out = DMatrix::zeros(n, n);
        let mut m = vec![0.0; l.n_cell];
        let mut psi = vec![0.0; l.n_edge];
        let mut row = vec![0.0; n];
        for (j, side) in l.edges.iter().enumerate() {
            for (p, w) in self.edge_quads[j].iter() {
                self.basis.eval_into(p.x, &mut m);
                self.edge_bases[j].eval_into(p.s, &mut psi);
                row.iter_mut().for_each(|v| *v = 0.0);
                fill(j, side, &m, &psi, &mut row);
                let nz: Vec<usize> = (0..n).filter(|&i| row[i] != 0.0).collect();
                for &a in &nz {
                    for &b in &nz {
                        out[(a, b)] += h_inv * w * row[a] * row[b];
                    }
                }
            }
        }
        out
    }
}

/// Precomputed per-cell operators for order `k` with test space `P_{k-1}`.
pub struct LocalOperators {
    pub layout: LocalLayout,
    pub basis: CellBasis,
    /// Basis of `P_{k-1}(T)`, in which weak derivatives are expressed.
    pub test_basis: CellBasis,
    /// Weak curl coefficients, `dim P_{k-1}` by local length.
    pub curl: DMatrix<f64>,
    /// Weak divergence of `C v`.
    pub div: DMatrix<f64>,
    /// `(div_w(C v), phi_l)_T` for the test basis, i.e. `G_{k-1} * div`.
    pub div_moments: DMatrix<f64>,
    /// `(curl_w v, curl_w w)_T`.
    pub curl_curl: DMatrix<f64>,
    pub stab_normal: DMatrix<f64>,
    pub stab_tangential: DMatrix<f64>,
    pub coeff: Matrix2<f64>,
}

impl LocalOperators {
    /// `c` is the coefficient inside the divergence and the normal
    /// stabilizer (`eps` for the electric problem, `mu` for the magnetic one).
    pub fn new(mesh: &Mesh, cell: usize, k: usize, c: &Matrix2<f64>) -> Result<Self> {
        assert!(k >= 1, "weak Galerkin order must be at least 1");
        let ctx = CellContext::new(mesh, cell, k)?;
        let r = k - 1;
        let test_basis = ctx.test_basis(mesh, r)?;
        let curl_rhs = ctx.curl_rhs(mesh, r)?;
        let div_moments = ctx.divergence_rhs(mesh, r, c)?;
        let curl = test_basis.solve_gram_matrix(&curl_rhs);
        let div = test_basis.solve_gram_matrix(&div_moments);
        let curl_curl = curl.transpose() * &curl_rhs;
        let stab_normal = ctx.stabilizer_normal(mesh, c);
        let stab_tangential = ctx.stabilizer_tangential(mesh);
        Ok(Self {
            layout: ctx.layout.clone(),
            basis: ctx.basis.clone(),
            test_basis,
            curl,
            div,
            div_moments,
            curl_curl,
            stab_normal,
            stab_tangential,
            coeff: *c,
        })
    }

    /// `(M v_0, w_0)_T` for a constant 2x2 matrix `M`.
    pub fn vector_mass(&self, m: &Matrix2<f64>) -> DMatrix<f64> {
        let l = &self.layout;
        let g = self.basis.gram();
        let mut out = DMatrix::zeros(l.len(), l.len());
        for p in 0..2 {
            for q in 0..2 {
                for a in 0..l.n_cell {
                    for b in 0..l.n_cell {
                        out[(l.v0(p, a), l.v0(q, b))] += m[(p, q)] * g[(a, b)];
                    }
                }
            }
        }
        out
    }

    pub fn stabilizer(&self) -> DMatrix<f64> {
        &self.stab_normal + &self.stab_tangential
    }
}

/// Weak divergence of `C v` in `P_r(T)`, as scaled-monomial coefficients.
pub fn weak_divergence(
    mesh: &Mesh,
    v: &WeakFunctionLocal,
    c: &Matrix2<f64>,
    r: usize,
) -> Result<DVector<f64>> {
    let ctx = CellContext::new(mesh, v.layout.cell, v.layout.k)?;
    let test = ctx.test_basis(mesh, r)?;
    let rhs = ctx.divergence_rhs(mesh, r, c)? * &v.coeffs;
    Ok(test.solve_gram(&rhs))
}

/// Weak curl of `v` in `P_r(T)`, as scaled-monomial coefficients.
pub fn weak_curl(mesh: &Mesh, v: &WeakFunctionLocal, r: usize) -> Result<DVector<f64>> {
    let ctx = CellContext::new(mesh, v.layout.cell, v.layout.k)?;
    let test = ctx.test_basis(mesh, r)?;
    let rhs = ctx.curl_rhs(mesh, r)? * &v.coeffs;
    Ok(test.solve_gram(&rhs))
}

/// Central-difference Jacobian, `J[(i, j)] = d w_i / d x_j`.
pub fn fd_jacobian<F: Fn(Point) -> Vector2<f64>>(w: F, x: Point, step: f64) -> Matrix2<f64> {
    let ex = Vector2::new(step, 0.0);
    let ey = Vector2::new(0.0, step);
    let dx = (w(x + ex) - w(x - ex)) / (2.0 * step);
    let dy = (w(x + ey) - w(x - ey)) / (2.0 * step);
    Matrix2::new(dx.x, dy.x, dx.y, dy.y)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct CommutativityResidual {
    /// `max_T || div_w(C Q_h w) - Q(div(C w)) ||_T`
    pub divergence: f64,
    /// `max_T || curl_w(Q_h w) - Q(curl w) ||_T`
    pub curl: f64,
}

impl CommutativityResidual {
    pub fn max(&self) -> f64 {
        self.divergence.max(self.curl)
    }
}

/// Residuals of the commutative identities on every cell, with `r = k - 1`.
/// `coeff(cell)` is the coefficient inside the divergence; `jac` returns the
/// Jacobian of `w`.
pub fn check_commutativity<C, W, J>(
    mesh: &Mesh,
    k: usize,
    coeff: C,
    w: W,
    jac: J,
) -> Result<CommutativityResidual>
where
    C: Fn(usize) -> Matrix2<f64>,
    W: Fn(Point) -> Vector2<f64>,
    J: Fn(Point) -> Matrix2<f64>,
{
    let mut out = CommutativityResidual::default();
    for cell in 0..mesh.num_cells() {
        let c = coeff(cell);
        let ctx = CellContext::new(mesh, cell, k)?;
        let r = k - 1;
        let test = ctx.test_basis(mesh, r)?;
        let qw = WeakFunctionLocal::interpolate(mesh, ctx.layout.clone(), &c, &w)?;
        let div_w = test.solve_gram(&(ctx.divergence_rhs(mesh, r, &c)? * &qw.coeffs));
        let curl_w = test.solve_gram(&(ctx.curl_rhs(mesh, r)? * &qw.coeffs));
        let div_exact = test.project(&ctx.quad, |x| (c * jac(x)).trace());
        let curl_exact = test.project(&ctx.quad, |x| {
            let j = jac(x);
            j[(1, 0)] - j[(0, 1)]
        });
        let norm = |d: DVector<f64>| (d.dot(&(test.gram() * &d))).max(0.0).sqrt();
        out.divergence = out.divergence.max(norm(div_w - div_exact));
        out.curl = out.curl.max(norm(curl_w - curl_exact));
    }
    Ok(out)
}
