//! Global saddle-point systems for the electric and magnetic problems.
//!
//! Unknowns are numbered cell `v_0` blocks first, then edge `v_b` blocks
//! (normal then tangential coefficients in the `(n_e, t_e)` frame), then
//! the multiplier blocks, then the mean-value multiplier for the magnetic
//! problem. Rows are test functions: `A[i][j] = a(phi_j, phi_i)`.

pub mod coefficients;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use coefficients::{CoefficientField, Material, MaterialSpec};

use crate::basis::quadrature::{cell_quadrature, edge_quadrature};
use crate::basis::{cell_dim, edge_dim, quadrature_degree, EdgeBasis};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::solver::CscMatrix;
use crate::weakops::{LocalLayout, LocalOperators};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Electric,
    Magnetic,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Electric => "electric",
            Kind::Magnetic => "magnetic",
        }
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "electric" | "1" => Ok(Kind::Electric),
            "magnetic" | "2" => Ok(Kind::Magnetic),
            _ => Err(Error::InvalidArgument(format!("unknown problem kind `{s}`"))),
        }
    }
}

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Global index layout and essential boundary masks.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub kind: Kind,
    pub k: usize,
    pub num_cells: usize,
    pub num_edges: usize,
    /// `dim P_k(T)`
    pub n_cell: usize,
    /// `dim P_k(e)`
    pub n_edge: usize,
    /// `dim P_{k-1}(T)`
    pub n_mult: usize,
    masked: Vec<bool>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, k: usize, kind: Kind) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("order k must be at least 1".into()));
        }
        if mesh.num_cells() == 0 {
            return Err(Error::InvalidArgument("mesh has no cells".into()));
        }
        let mut map = Self {
            kind,
            k,
            num_cells: mesh.num_cells(),
            num_edges: mesh.num_edges(),
            n_cell: cell_dim(k),
            n_edge: edge_dim(k),
            n_mult: cell_dim(k - 1),
            masked: Vec::new(),
        };
        let mut masked = vec![false; map.len()];
        for e in mesh.boundary_edges() {
            for i in 0..map.n_edge {
                let d = match kind {
                    Kind::Electric => map.edge_tangential(e, i),
                    Kind::Magnetic => map.edge_normal(e, i),
                };
                masked[d] = true;
            }
        }
        map.masked = masked;
        Ok(map)
    }

    pub fn cell_dof(&self, cell: usize, comp: usize, i: usize) -> usize {
        cell * 2 * self.n_cell + comp * self.n_cell + i
    }

    pub fn edge_normal(&self, e: usize, i: usize) -> usize {
        self.num_cells * 2 * self.n_cell + e * 2 * self.n_edge + i
    }

    pub fn edge_tangential(&self, e: usize, i: usize) -> usize {
        self.edge_normal(e, i) + self.n_edge
    }

    /// Number of field unknowns `(v_0, v_b)`.
    pub fn num_vector(&self) -> usize {
        self.num_cells * 2 * self.n_cell + self.num_edges * 2 * self.n_edge
    }

    pub fn mult(&self, cell: usize, l: usize) -> usize {
        self.num_vector() + cell * self.n_mult + l
    }

    /// Row of the mean-zero multiplier, magnetic problem only.
    pub fn constraint(&self) -> Option<usize> {
        (self.kind == Kind::Magnetic).then(|| self.num_vector() + self.num_cells * self.n_mult)
    }

    pub fn len(&self) -> usize {
        self.num_vector() + self.num_cells * self.n_mult + usize::from(self.kind == Kind::Magnetic)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_masked(&self, dof: usize) -> bool {
        self.masked[dof]
    }

    pub fn masked_dofs(&self) -> Vec<usize> {
        (0..self.len()).filter(|&d| self.masked[d]).collect()
    }

    /// Global indices of the local layout of one cell.
    pub fn local_to_global(&self, layout: &LocalLayout) -> Vec<usize> {
        let mut out = vec![0; layout.len()];
        for comp in 0..2 {
            for i in 0..layout.n_cell {
                out[layout.v0(comp, i)] = self.cell_dof(layout.cell, comp, i);
            }
        }
        for (j, side) in layout.edges.iter().enumerate() {
            for i in 0..layout.n_edge {
                out[layout.normal(j, i)] = self.edge_normal(side.edge, i);
                out[layout.tangential(j, i)] = self.edge_tangential(side.edge, i);
            }
        }
        out
    }

    pub fn mult_dofs(&self, cell: usize) -> Vec<usize> {
        (0..self.n_mult).map(|l| self.mult(cell, l)).collect()
    }
}

pub type VectorSource = Arc<dyn Fn(usize, Point) -> [Complex64; 2] + Send + Sync>;
pub type ScalarSource = Arc<dyn Fn(usize, Point) -> Complex64 + Send + Sync>;

/// Right-hand side data. Field closures take the cell id so piecewise
/// definitions can pick their branch.
#[derive(Clone)]
pub struct SourceData {
    pub kind: Kind,
    /// `j_e` for the electric problem, `eta` for the magnetic one.
    pub volume: VectorSource,
    /// `rho`, electric problem only.
    pub charge: Option<ScalarSource>,
    /// Field whose essential component is imposed on the boundary; `None`
    /// means homogeneous data.
    pub boundary: Option<VectorSource>,
}

impl SourceData {
    pub fn zero(kind: Kind) -> Self {
        Self { kind, volume: Arc::new(|_, _| [czero(); 2]), charge: None, boundary: None }
    }

    fn check(&self, kind: Kind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::InvalidArgument(format!(
                "source data is for the {} problem, assembling {}",
                self.kind, kind
            )));
        }
        if kind == Kind::Magnetic && self.charge.is_some() {
            return Err(Error::InvalidArgument("the magnetic problem takes no charge density".into()));
        }
        Ok(())
    }
}

/// Per-cell operators for one problem on one mesh.
pub struct Discretization<'m> {
    pub mesh: &'m Mesh,
    pub coeff: CoefficientField,
    pub dofmap: DofMap,
    pub ops: Vec<LocalOperators>,
}

impl<'m> Discretization<'m> {
    pub fn new(mesh: &'m Mesh, coeff: &CoefficientField, k: usize, kind: Kind) -> Result<Self> {
        let dofmap = DofMap::new(mesh, k, kind)?;
        if coeff.num_cells() != mesh.num_cells() {
            return Err(Error::InvalidCoefficients(format!(
                "coefficient field has {} cells, mesh has {}",
                coeff.num_cells(),
                mesh.num_cells()
            )));
        }
        coeff.validate()?;
        let ops = (0..mesh.num_cells())
            .into_par_iter()
            .map(|c| LocalOperators::new(mesh, c, k, &coeff.flux(kind, c)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { mesh, coeff: coeff.clone(), dofmap, ops })
    }

    pub fn kind(&self) -> Kind {
        self.dofmap.kind
    }

    pub fn k(&self) -> usize {
        self.dofmap.k
    }

    /// Local matrix of `a(., .)` on one cell.
    pub fn local_a(&self, cell: usize) -> DMatrix<Complex64> {
        let op = &self.ops[cell];
        let kind = self.kind();
        let kappa = self.coeff.curl_weight(kind, cell);
        let (alpha, beta, m) = self.coeff.mass_terms(kind, cell);
        let mass_i = op.vector_mass(&Matrix2::identity());
        let mass_m = op.vector_mass(&m);
        let stab = op.stabilizer();
        let n = op.layout.len();
        DMatrix::from_fn(n, n, |i, j| {
            kappa * op.curl_curl[(i, j)]
                + alpha * mass_i[(i, j)]
                + beta * mass_m[(i, j)]
                + Complex64::new(stab[(i, j)], 0.0)
        })
    }

    /// `-i omega (j_e, w_0)` or `(eta, w_0)`, and `(rho, q)`.
    fn local_rhs(&self, cell: usize, source: &SourceData) -> (DVector<Complex64>, DVector<Complex64>) {
        let op = &self.ops[cell];
        let l = &op.layout;
        let quad = cell_quadrature(self.mesh, cell, quadrature_degree(self.k()));
        let scale = match self.kind() {
            Kind::Electric => Complex64::new(0.0, -self.coeff.omega()),
            Kind::Magnetic => Complex64::new(1.0, 0.0),
        };
        let mut fv = DVector::from_element(l.len(), czero());
        let mut fq = DVector::from_element(op.test_basis.dim(), czero());
        let mut m = vec![0.0; l.n_cell];
        let mut psi = vec![0.0; op.test_basis.dim()];
        for (x, w) in quad.iter() {
            op.basis.eval_into(x, &mut m);
            let f = (source.volume)(cell, x);
            for a in 0..l.n_cell {
                fv[l.v0(0, a)] += scale * f[0] * (w * m[a]);
                fv[l.v0(1, a)] += scale * f[1] * (w * m[a]);
            }
            if let Some(rho) = &source.charge {
                op.test_basis.eval_into(x, &mut psi);
                let r = rho(cell, x);
                for (t, p) in psi.iter().enumerate() {
                    fq[t] += r * (w * p);
                }
            }
        }
        (fv, fq)
    }

    /// `int_T psi_l` for the multiplier basis.
    fn local_means(&self, cell: usize) -> DVector<f64> {
        let op = &self.ops[cell];
        let quad = cell_quadrature(self.mesh, cell, quadrature_degree(self.k()));
        let mut out = DVector::zeros(op.test_basis.dim());
        let mut psi = vec![0.0; op.test_basis.dim()];
        for (x, w) in quad.iter() {
            op.test_basis.eval_into(x, &mut psi);
            for (t, p) in psi.iter().enumerate() {
                out[t] += w * p;
            }
        }
        out
    }

    /// Assembles the full system with no boundary conditions applied.
    pub fn assemble_unconstrained(&self, source: &SourceData) -> Result<LinearSystem> {
        source.check(self.kind())?;
        self.coeff.check_coercivity()?;
        let dm = &self.dofmap;
        let n = dm.len();
        struct Local {
            dofs: Vec<usize>,
            mult: Vec<usize>,
            a: DMatrix<Complex64>,
            b: DMatrix<f64>,
            fv: DVector<Complex64>,
            fq: DVector<Complex64>,
            means: Option<DVector<f64>>,
        }
        let locals: Vec<Local> = (0..dm.num_cells)
            .into_par_iter()
            .map(|c| {
                let (fv, fq) = self.local_rhs(c, source);
                Local {
                    dofs: dm.local_to_global(&self.ops[c].layout),
                    mult: dm.mult_dofs(c),
                    a: self.local_a(c),
                    b: self.ops[c].div_moments.clone(),
                    fv,
                    fq,
                    means: dm.constraint().map(|_| self.local_means(c)),
                }
            })
            .collect();

        let mut triplets = Vec::new();
        let mut rhs = DVector::from_element(n, czero());
        for loc in &locals {
            for (j, &gj) in loc.dofs.iter().enumerate() {
                for (i, &gi) in loc.dofs.iter().enumerate() {
                    let v = loc.a[(i, j)];
                    if v != czero() {
                        triplets.push((gi, gj, v));
                    }
                }
            }
            for (l, &gl) in loc.mult.iter().enumerate() {
                for (i, &gi) in loc.dofs.iter().enumerate() {
                    let v = loc.b[(l, i)];
                    if v != 0.0 {
                        triplets.push((gi, gl, Complex64::new(-v, 0.0)));
                        triplets.push((gl, gi, Complex64::new(v, 0.0)));
                    }
                }
            }
            if let (Some(row), Some(means)) = (dm.constraint(), &loc.means) {
                for (l, &gl) in loc.mult.iter().enumerate() {
                    triplets.push((gl, row, Complex64::new(means[l], 0.0)));
                    triplets.push((row, gl, Complex64::new(means[l], 0.0)));
                }
            }
            for (i, &gi) in loc.dofs.iter().enumerate() {
                rhs[gi] += loc.fv[i];
            }
            for (l, &gl) in loc.mult.iter().enumerate() {
                rhs[gl] += loc.fq[l];
            }
        }
        let matrix = CscMatrix::from_triplets(n, n, &triplets)?;
        Ok(LinearSystem {
            matrix,
            rhs,
            dofmap: dm.clone(),
            free: (0..n).collect(),
            fixed: DVector::from_element(n, czero()),
        })
    }

    /// Values of the masked components from the source's boundary field,
    /// in the order of [`DofMap::masked_dofs`].
    pub fn boundary_data(&self, source: &SourceData) -> Vec<Complex64> {
        let dm = &self.dofmap;
        let Some(g) = &source.boundary else {
            return vec![czero(); dm.masked_dofs().len()];
        };
        let mut values = vec![czero(); dm.len()];
        for e in self.mesh.boundary_edges() {
            let cell = self.mesh.edge(e).plus_cell();
            let (nrm, tan) = self.edge_components(cell, e, |x| g(cell, x));
            for i in 0..dm.n_edge {
                match dm.kind {
                    Kind::Electric => values[dm.edge_tangential(e, i)] = tan[i],
                    Kind::Magnetic => values[dm.edge_normal(e, i)] = nrm[i],
                }
            }
        }
        dm.masked_dofs().into_iter().map(|d| values[d]).collect()
    }

    /// `(Q_b(C u . n_e), Q_b(u . t_e))` on edge `e` with the coefficient of `cell`.
    fn edge_components<F>(&self, cell: usize, e: usize, u: F) -> (DVector<Complex64>, DVector<Complex64>)
    where
        F: Fn(Point) -> [Complex64; 2],
    {
        let edge = self.mesh.edge(e);
        let c = self.coeff.flux(self.kind(), cell);
        let quad = edge_quadrature(self.mesh, e, quadrature_degree(self.k()));
        let basis = EdgeBasis::new(self.mesh, e, self.k());
        let cn = c * edge.normal;
        let t = edge.tangent;
        let part = |f: &dyn Fn([Complex64; 2]) -> Complex64| {
            let re = basis.project(&quad, |p| f(u(p.x)).re);
            let im = basis.project(&quad, |p| f(u(p.x)).im);
            DVector::from_fn(re.len(), |i, _| Complex64::new(re[i], im[i]))
        };
        let nrm = part(&|v| v[0] * cn.x + v[1] * cn.y);
        let tan = part(&|v| v[0] * t.x + v[1] * t.y);
        (nrm, tan)
    }

    /// `Q_h u = {Q_0 u, Q_b(C u . n) n + Q_b(n x (u x n))}` and `Q p` as a
    /// full coefficient vector. On interior edges the side with the smaller
    /// cell id supplies `C` and the branch of a piecewise `u`.
    pub fn interpolate<U, P>(&self, u: U, p: Option<P>) -> Result<DVector<Complex64>>
    where
        U: Fn(usize, Point) -> [Complex64; 2] + Sync,
        P: Fn(usize, Point) -> Complex64 + Sync,
    {
        let dm = &self.dofmap;
        let mut out = DVector::from_element(dm.len(), czero());
        let deg = quadrature_degree(self.k());
        for c in 0..dm.num_cells {
            let op = &self.ops[c];
            let quad = cell_quadrature(self.mesh, c, deg);
            let proj = |f: &dyn Fn(Point) -> f64| op.basis.project(&quad, f);
            let comps = [
                (proj(&|x| u(c, x)[0].re), proj(&|x| u(c, x)[0].im)),
                (proj(&|x| u(c, x)[1].re), proj(&|x| u(c, x)[1].im)),
            ];
            for (comp, (re, im)) in comps.iter().enumerate() {
                for i in 0..dm.n_cell {
                    out[dm.cell_dof(c, comp, i)] = Complex64::new(re[i], im[i]);
                }
            }
            if let Some(p) = &p {
                let re = op.test_basis.project(&quad, |x| p(c, x).re);
                let im = op.test_basis.project(&quad, |x| p(c, x).im);
                for l in 0..dm.n_mult {
                    out[dm.mult(c, l)] = Complex64::new(re[l], im[l]);
                }
            }
        }
        for e in 0..dm.num_edges {
            let edge = self.mesh.edge(e);
            let cell = match edge.minus_cell() {
                Some(m) => m.min(edge.plus_cell()),
                None => edge.plus_cell(),
            };
            let (nrm, tan) = self.edge_components(cell, e, |x| u(cell, x));
            for i in 0..dm.n_edge {
                out[dm.edge_normal(e, i)] = nrm[i];
                out[dm.edge_tangential(e, i)] = tan[i];
            }
        }
        Ok(out)
    }

    /// Local coefficients of a global vector on one cell.
    pub fn local_vector(&self, cell: usize, v: &DVector<Complex64>) -> DVector<Complex64> {
        let dofs = self.dofmap.local_to_global(&self.ops[cell].layout);
        DVector::from_fn(dofs.len(), |i, _| v[dofs[i]])
    }

    pub fn local_mult(&self, cell: usize, v: &DVector<Complex64>) -> DVector<Complex64> {
        DVector::from_fn(self.dofmap.n_mult, |l, _| v[self.dofmap.mult(cell, l)])
    }

    /// `s(v, w)` summed over cells, without conjugation.
    pub fn stabilizer(&self, v: &DVector<Complex64>, w: &DVector<Complex64>) -> Complex64 {
        (0..self.dofmap.num_cells)
            .map(|c| {
                let s = self.ops[c].stabilizer().map(|x| Complex64::new(x, 0.0));
                let lv = self.local_vector(c, v);
                let lw = self.local_vector(c, w);
                (lw.transpose() * s * lv)[(0, 0)]
            })
            .sum()
    }

    /// `a(v, w)` summed over cells, without conjugation.
    pub fn bilinear_a(&self, v: &DVector<Complex64>, w: &DVector<Complex64>) -> Complex64 {
        (0..self.dofmap.num_cells)
            .map(|c| {
                let a = self.local_a(c);
                let lv = self.local_vector(c, v);
                let lw = self.local_vector(c, w);
                (lw.transpose() * a * lv)[(0, 0)]
            })
            .sum()
    }

    /// `b(v, q) = sum_T (div_w(C v), q)_T`; `q` is read from the multiplier
    /// block of its argument.
    pub fn bilinear_b(&self, v: &DVector<Complex64>, q: &DVector<Complex64>) -> Complex64 {
        (0..self.dofmap.num_cells)
            .map(|c| {
                let b = self.ops[c].div_moments.map(|x| Complex64::new(x, 0.0));
                let lv = self.local_vector(c, v);
                let lq = self.local_mult(c, q);
                (lq.transpose() * b * lv)[(0, 0)]
            })
            .sum()
    }

    /// Weak curl of `v` on each cell, as `P_{k-1}` coefficients.
    pub fn weak_curl(&self, v: &DVector<Complex64>) -> Vec<DVector<Complex64>> {
        (0..self.dofmap.num_cells)
            .map(|c| self.ops[c].curl.map(|x| Complex64::new(x, 0.0)) * self.local_vector(c, v))
            .collect()
    }

    /// Weak divergence of `C v` on each cell.
    pub fn weak_divergence(&self, v: &DVector<Complex64>) -> Vec<DVector<Complex64>> {
        (0..self.dofmap.num_cells)
            .map(|c| self.ops[c].div.map(|x| Complex64::new(x, 0.0)) * self.local_vector(c, v))
            .collect()
    }
}

/// A square complex system together with the map back to the full layout.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CscMatrix,
    pub rhs: DVector<Complex64>,
    pub dofmap: DofMap,
    /// Global dof of each unknown.
    pub free: Vec<usize>,
    /// Full-length vector holding the imposed values of eliminated dofs.
    pub fixed: DVector<Complex64>,
}

impl LinearSystem {
    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// Full coefficient vector from a solution of this system.
    pub fn expand(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        let mut full = self.fixed.clone();
        for (i, &g) in self.free.iter().enumerate() {
            full[g] = x[i];
        }
        full
    }
}

/// Eliminates the masked dofs of an unconstrained system, moving
/// `A[:, masked] * data` to the right side.
pub fn apply_boundary_conditions(system: &LinearSystem, data: &[Complex64]) -> Result<LinearSystem> {
    let dm = &system.dofmap;
    let masked = dm.masked_dofs();
    if system.free.len() != dm.len() {
        return Err(Error::InvalidArgument("boundary conditions are already applied".into()));
    }
    if data.len() != masked.len() {
        return Err(Error::InvalidArgument(format!(
            "boundary data has {} values, the space constrains {} dofs",
            data.len(),
            masked.len()
        )));
    }
    let n = dm.len();
    let mut fixed = DVector::from_element(n, czero());
    for (&d, &g) in masked.iter().zip(data) {
        fixed[d] = g;
    }
    let mut index = vec![usize::MAX; n];
    let free: Vec<usize> = (0..n).filter(|&d| !dm.is_masked(d)).collect();
    for (i, &d) in free.iter().enumerate() {
        index[d] = i;
    }
    let a = &system.matrix;
    let mut rhs = DVector::from_fn(free.len(), |i, _| system.rhs[free[i]]);
    let mut triplets = Vec::with_capacity(a.nnz());
    for j in 0..n {
        for (i, v) in a.column(j) {
            if index[i] == usize::MAX {
                continue;
            }
            if index[j] == usize::MAX {
                rhs[index[i]] -= v * fixed[j];
            } else {
                triplets.push((index[i], index[j], v));
            }
        }
    }
    let matrix = CscMatrix::from_triplets(free.len(), free.len(), &triplets)?;
    Ok(LinearSystem { matrix, rhs, dofmap: dm.clone(), free, fixed })
}

fn assemble(mesh: &Mesh, coeff: &CoefficientField, k: usize, source: &SourceData, kind: Kind) -> Result<LinearSystem> {
    let disc = Discretization::new(mesh, coeff, k, kind)?;
    let full = disc.assemble_unconstrained(source)?;
    apply_boundary_conditions(&full, &disc.boundary_data(source))
}

/// Electric system over `V_{h,0}^1 x W_h^1` with boundary data applied.
pub fn assemble_electric(mesh: &Mesh, coeff: &CoefficientField, k: usize, source: &SourceData) -> Result<LinearSystem> {
    assemble(mesh, coeff, k, source, Kind::Electric)
}

/// Magnetic system over `V_{h,0}^2 x W_h^2` with the mean-zero multiplier.
pub fn assemble_magnetic(mesh: &Mesh, coeff: &CoefficientField, k: usize, source: &SourceData) -> Result<LinearSystem> {
    assemble(mesh, coeff, k, source, Kind::Magnetic)
}

#[cfg(test)]
mod tests;
