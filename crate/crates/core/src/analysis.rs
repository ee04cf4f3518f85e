//! Discrete norms, errors against projected exact solutions, and numerical
//! probes of the stability estimates.
//!
//! Vectors are full-length coefficient vectors in the layout of
//! [`DofMap`](crate::assembly::DofMap). Norms conjugate; the bilinear forms
//! they are compared with do not.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::{Discretization, Kind, ScalarSource};
use crate::basis::quadrature::{cell_quadrature, edge_quadrature};
use crate::basis::{quadrature_degree, CellBasis, EdgeBasis};
use crate::error::Result;
use crate::mesh::{Mesh, Point};

/// `Re(v^H M v)` for a real symmetric `M`.
fn herm(m: &DMatrix<f64>, v: &DVector<Complex64>) -> f64 {
    let re = v.map(|z| z.re);
    let im = v.map(|z| z.im);
    re.dot(&(m * &re)) + im.dot(&(m * &im))
}

fn sub(v: &DVector<Complex64>, idx: impl Iterator<Item = usize>) -> DVector<Complex64> {
    DVector::from_vec(idx.map(|i| v[i]).collect())
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct NormBundle {
    /// `|||v|||`
    pub triple_bar: f64,
    /// `sum_T ||curl_w v||_T^2`
    pub curl: f64,
    /// `sum_T ||v_0||_T^2`
    pub l2: f64,
    /// `sum_T h_T^{-1} ||(C v_0 - v_b) . n||^2_{dT}`
    pub normal: f64,
    /// `sum_T h_T^{-1} ||(v_0 - v_b) x n||^2_{dT}`
    pub tangential: f64,
    /// `(normal + tangential)^{1/2}`
    pub seminorm: f64,
    /// `||q||_{W_h}` of the multiplier block.
    pub multiplier: f64,
    /// `||v_b||_{E_h}`
    pub edge: f64,
}

impl NormBundle {
    /// `|||v|||^2 - (curl + l2 + normal + tangential)`, relative.
    pub fn summand_defect(&self) -> f64 {
        let s = self.curl + self.l2 + self.normal + self.tangential;
        (self.triple_bar * self.triple_bar - s).abs() / s.max(1e-300)
    }
}

/// All norms of `v`, the multiplier norm taken from its multiplier block.
pub fn norms(disc: &Discretization, v: &DVector<Complex64>) -> NormBundle {
    let parts: Vec<[f64; 4]> = (0..disc.mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let op = &disc.ops[c];
            let lv = disc.local_vector(c, v);
            let l = &op.layout;
            let g = op.basis.gram();
            let l2 = (0..2).map(|comp| herm(g, &sub(&lv, (0..l.n_cell).map(|i| l.v0(comp, i))))).sum();
            [herm(&op.curl_curl, &lv), l2, herm(&op.stab_normal, &lv), herm(&op.stab_tangential, &lv)]
        })
        .collect();
    let mut s = [0.0; 4];
    for p in parts {
        for i in 0..4 {
            s[i] += p[i];
        }
    }
    let [curl, l2, normal, tangential] = s;
    NormBundle {
        triple_bar: (curl + l2 + normal + tangential).sqrt(),
        curl,
        l2,
        normal,
        tangential,
        seminorm: (normal + tangential).sqrt(),
        multiplier: multiplier_norm(disc, v),
        edge: edge_norm(disc, v),
    }
}

pub fn triple_bar_norm(disc: &Discretization, v: &DVector<Complex64>) -> f64 {
    norms(disc, v).triple_bar
}

/// `(sum_T h_T int_dT |v_b|^2)^{1/2}`.
pub fn edge_norm(disc: &Discretization, v: &DVector<Complex64>) -> f64 {
    let mesh = disc.mesh;
    let dm = &disc.dofmap;
    let per_edge: Vec<f64> = (0..mesh.num_edges())
        .map(|e| {
            let g = EdgeBasis::new(mesh, e, dm.k).gram().clone();
            let a = DVector::from_fn(dm.n_edge, |i, _| v[dm.edge_normal(e, i)]);
            let b = DVector::from_fn(dm.n_edge, |i, _| v[dm.edge_tangential(e, i)]);
            herm(&g, &a) + herm(&g, &b)
        })
        .collect();
    let mut sum = 0.0;
    for c in 0..mesh.num_cells() {
        let h = mesh.cell(c).diameter;
        for &e in &mesh.cell(c).edges {
            sum += h * per_edge[e];
        }
    }
    sum.sqrt()
}

/// Values of the multiplier of `cell` at `x`.
fn mult_value(disc: &Discretization, q: &DVector<Complex64>, cell: usize, x: Point) -> Complex64 {
    let tb = &disc.ops[cell].test_basis;
    let vals = tb.eval(x);
    (0..disc.dofmap.n_mult).map(|l| q[disc.dofmap.mult(cell, l)] * vals[l]).sum()
}

fn mult_grad(disc: &Discretization, q: &DVector<Complex64>, cell: usize, x: Point) -> Vector2<Complex64> {
    let tb = &disc.ops[cell].test_basis;
    let n = tb.dim();
    let (mut dx, mut dy) = (vec![0.0; n], vec![0.0; n]);
    tb.eval_grad_into(x, &mut dx, &mut dy);
    let mut g = Vector2::new(Complex64::default(), Complex64::default());
    for l in 0..n {
        let ql = q[disc.dofmap.mult(cell, l)];
        g.x += ql * dx[l];
        g.y += ql * dy[l];
    }
    g
}

/// Edges carrying a jump term: all edges for the electric problem, interior
/// edges for the magnetic one.
fn jump_edges(disc: &Discretization) -> Vec<usize> {
    match disc.kind() {
        Kind::Electric => (0..disc.mesh.num_edges()).collect(),
        Kind::Magnetic => disc.mesh.interior_edges().collect(),
    }
}

/// `[q]` on edge `e` at `x`: plus side minus minus side, or the trace on
/// the boundary.
fn jump(disc: &Discretization, q: &DVector<Complex64>, e: usize, x: Point) -> Complex64 {
    let edge = disc.mesh.edge(e);
    let plus = mult_value(disc, q, edge.plus_cell(), x);
    match edge.minus_cell() {
        Some(m) => plus - mult_value(disc, q, m, x),
        None => plus,
    }
}

/// `h^2 sum_T (C grad q, grad q)_T` and `h sum_e ||[q]||_e^2`, unconjugated
/// when `conj` is false.
fn multiplier_parts(disc: &Discretization, q: &DVector<Complex64>, conj: bool) -> (Complex64, Complex64) {
    let mesh = disc.mesh;
    let h = mesh.h();
    let k = disc.k();
    let kind = disc.kind();
    let deg = 2 * k;
    let vol: Vec<Complex64> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let cm = disc.coeff.flux(kind, c).map(|x| Complex64::new(x, 0.0));
            let quad = cell_quadrature(mesh, c, deg);
            let mut s = Complex64::default();
            for (x, w) in quad.iter() {
                let g = mult_grad(disc, q, c, x);
                let cg = cm * g;
                let other = if conj { g.map(|z| z.conj()) } else { g };
                s += cg.dot(&other) * w;
            }
            s
        })
        .collect();
    let jumps: Vec<Complex64> = jump_edges(disc)
        .into_par_iter()
        .map(|e| {
            let quad = edge_quadrature(mesh, e, deg);
            let mut s = Complex64::default();
            for (p, w) in quad.iter() {
                let j = jump(disc, q, e, p.x);
                s += if conj { j * j.conj() } else { j * j } * w;
            }
            s
        })
        .collect();
    let v: Complex64 = vol.iter().sum();
    let j: Complex64 = jumps.iter().sum();
    (v * (h * h), j * h)
}

/// `(h^2 sum_T (C grad q, grad q)_T + h sum_e ||[q]||_e^2)^{1/2}` for the
/// multiplier block of `q`.
pub fn multiplier_norm(disc: &Discretization, q: &DVector<Complex64>) -> f64 {
    let (v, j) = multiplier_parts(disc, q, true);
    (v.re + j.re).max(0.0).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    #[serde(skip)]
    pub v_q: DVector<Complex64>,
    /// `b(v_q, q)`
    pub lhs: Complex64,
    /// `h^2 sum_T (C grad q, grad q)_T + h sum_e [q]^2`
    pub rhs: Complex64,
    /// `max_T ||curl_w {0; h v_{q,b}}||_T`
    pub edge_curl: f64,
    /// `|||v_q||| / ||q||_{W_h}`
    pub bound: f64,
}

impl Witness {
    pub fn relative_gap(&self) -> f64 {
        (self.lhs - self.rhs).norm() / self.rhs.norm().max(1e-300)
    }
}

/// `v_q = {-h^2 grad q; h v_{q,b}}` with `v_{q,b} = [q] n_e` on interior
/// edges, `q n` (electric) or `0` (magnetic) on boundary edges.
pub fn infsup_witness(disc: &Discretization, q: &DVector<Complex64>) -> Result<Witness> {
    let mesh = disc.mesh;
    let dm = &disc.dofmap;
    let h = mesh.h();
    let k = disc.k();
    let mut v = DVector::from_element(dm.len(), Complex64::default());
    let mut edge_only = v.clone();
    for c in 0..mesh.num_cells() {
        let op = &disc.ops[c];
        let quad = cell_quadrature(mesh, c, quadrature_degree(k));
        for comp in 0..2 {
            let re = op.basis.project(&quad, |x| mult_grad(disc, q, c, x)[comp].re);
            let im = op.basis.project(&quad, |x| mult_grad(disc, q, c, x)[comp].im);
            for i in 0..dm.n_cell {
                v[dm.cell_dof(c, comp, i)] = Complex64::new(re[i], im[i]) * (-h * h);
            }
        }
    }
    for e in 0..mesh.num_edges() {
        let edge = mesh.edge(e);
        if edge.boundary && disc.kind() == Kind::Magnetic {
            continue;
        }
        let quad = edge_quadrature(mesh, e, quadrature_degree(k));
        let basis = EdgeBasis::new(mesh, e, k);
        let re = basis.project(&quad, |p| jump(disc, q, e, p.x).re);
        let im = basis.project(&quad, |p| jump(disc, q, e, p.x).im);
        for i in 0..dm.n_edge {
            let a = Complex64::new(re[i], im[i]) * h;
            v[dm.edge_normal(e, i)] = a;
            edge_only[dm.edge_normal(e, i)] = a;
        }
    }
    let lhs = disc.bilinear_b(&v, q);
    let (vol, jmp) = multiplier_parts(disc, q, false);
    let edge_curl = disc
        .weak_curl(&edge_only)
        .iter()
        .enumerate()
        .map(|(c, w)| herm(disc.ops[c].test_basis.gram(), w).max(0.0).sqrt())
        .fold(0.0, f64::max);
    let qn = multiplier_norm(disc, q);
    let bound = if qn > 0.0 { triple_bar_norm(disc, &v) / qn } else { 0.0 };
    Ok(Witness { v_q: v, lhs, rhs: vol + jmp, edge_curl, bound })
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct DivergenceResidual {
    /// `max_T ||div_w(C u_h) - Q rho||_T`
    pub max: f64,
    /// Largest cellwise value of `||volume part||`, `||edge part||`,
    /// `||Q rho||` or `h_T^{-1} ||C u_0||`.
    pub scale: f64,
    pub relative: f64,
}

/// Cellwise residual of the discrete divergence equation for a full
/// solution vector; `charge` is `rho` for the electric problem.
pub fn divergence_residual(
    disc: &Discretization,
    solution: &DVector<Complex64>,
    charge: Option<&ScalarSource>,
) -> DivergenceResidual {
    let mesh = disc.mesh;
    let k = disc.k();
    let cells: Vec<(f64, f64)> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let op = &disc.ops[c];
            let l = &op.layout;
            let lv = disc.local_vector(c, solution);
            let g = op.test_basis.gram();
            let div = op.div.map(|x| Complex64::new(x, 0.0));
            let mut vol = lv.clone();
            for i in 2 * l.n_cell..l.len() {
                vol[i] = Complex64::default();
            }
            let vol_part = &div * &vol;
            let edge_part = &div * (&lv - &vol);
            let rho = match charge {
                Some(rho) => {
                    let quad = cell_quadrature(mesh, c, quadrature_degree(k));
                    let re = op.test_basis.project(&quad, |x| rho(c, x).re);
                    let im = op.test_basis.project(&quad, |x| rho(c, x).im);
                    DVector::from_fn(re.len(), |i, _| Complex64::new(re[i], im[i]))
                }
                None => DVector::from_element(op.test_basis.dim(), Complex64::default()),
            };
            let nrm = |v: &DVector<Complex64>| herm(g, v).max(0.0).sqrt();
            let res = nrm(&(&vol_part + &edge_part - &rho));
            let cm = op.coeff;
            let flux = herm(&op.vector_mass(&(cm.transpose() * cm)), &lv).max(0.0).sqrt() / mesh.cell(c).diameter;
            let scale = nrm(&vol_part).max(nrm(&edge_part)).max(nrm(&rho)).max(flux);
            (res, scale)
        })
        .collect();
    let max = cells.iter().map(|c| c.0).fold(0.0, f64::max);
    let scale = cells.iter().map(|c| c.1).fold(0.0, f64::max);
    DivergenceResidual { max, scale, relative: if scale > 0.0 { max / scale } else { max } }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ErrorReport {
    /// `|||Q_h u - u_h|||`
    pub energy: f64,
    /// `||Q p - p_h||_{W_h}`
    pub multiplier: f64,
    /// `||Q_0 u - u_0||`
    pub l2: f64,
    /// `||Q_b u - u_b||_{E_h}`
    pub edge: f64,
}

/// Errors of a full solution vector against the projections of `(u, p)`.
pub fn error_report<U, P>(disc: &Discretization, solution: &DVector<Complex64>, u: U, p: P) -> Result<ErrorReport>
where
    U: Fn(usize, Point) -> [Complex64; 2] + Sync,
    P: Fn(usize, Point) -> Complex64 + Sync,
{
    let mut e = disc.interpolate(u, Some(p))? - solution;
    if let Some(row) = disc.dofmap.constraint() {
        e[row] = Complex64::default();
    }
    let n = norms(disc, &e);
    Ok(ErrorReport { energy: n.triple_bar, multiplier: n.multiplier, l2: n.l2.sqrt(), edge: n.edge })
}

/// Random real field dofs in `[-1, 1]`, zero on masked and multiplier dofs.
pub fn random_weak_vector<R: Rng>(disc: &Discretization, rng: &mut R) -> DVector<Complex64> {
    let dm = &disc.dofmap;
    DVector::from_fn(dm.len(), |i, _| {
        if i < dm.num_vector() && !dm.is_masked(i) {
            Complex64::new(rng.gen_range(-1.0..1.0), 0.0)
        } else {
            Complex64::default()
        }
    })
}

/// Random multiplier block in `[-1, 1]`.
pub fn random_multiplier<R: Rng>(disc: &Discretization, rng: &mut R) -> DVector<Complex64> {
    let dm = &disc.dofmap;
    let mut q = DVector::from_element(dm.len(), Complex64::default());
    for c in 0..dm.num_cells {
        for l in 0..dm.n_mult {
            q[dm.mult(c, l)] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
        }
    }
    q
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoercivityProbe {
    pub samples: usize,
    /// Smallest `Im a(v,v) - omega sigma_0 ||v_0||^2` (electric) or
    /// `Re a(v,v)` (magnetic) over the samples.
    pub min_margin: f64,
    /// Largest `|a(v,v)| / |||v|||^2`, reported only.
    pub max_ratio: f64,
    /// Smallest `|a(v,v)| / |||v|||^2`, reported only.
    pub min_ratio: f64,
}

impl CoercivityProbe {
    pub fn passes(&self, tol: f64) -> bool {
        self.min_margin >= -tol
    }
}

pub fn coercivity_probe(disc: &Discretization, samples: usize, seed: u64) -> Result<CoercivityProbe> {
    disc.coeff.check_coercivity()?;
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let omega = disc.coeff.omega();
    let sigma0 = disc.coeff.sigma0();
    let mut out = CoercivityProbe { samples, min_margin: f64::INFINITY, max_ratio: 0.0, min_ratio: f64::INFINITY };
    for _ in 0..samples {
        let v = random_weak_vector(disc, &mut rng);
        let a = disc.bilinear_a(&v, &v);
        let n = norms(disc, &v);
        let margin = match disc.kind() {
            Kind::Electric => a.im - omega * sigma0 * n.l2,
            Kind::Magnetic => a.re,
        };
        let ratio = a.norm() / (n.triple_bar * n.triple_bar);
        out.min_margin = out.min_margin.min(margin);
        out.max_ratio = out.max_ratio.max(ratio);
        out.min_ratio = out.min_ratio.min(ratio);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct InequalityProbe {
    /// `max ||phi||_e^2 / (h_T^{-1} ||phi||_T^2)`
    pub trace: f64,
    /// `max h_T ||grad phi||_T / ||phi||_T`
    pub inverse: f64,
}

/// Trace and inverse inequality constants over random `phi in P_k(T)`.
pub fn inequality_probe(mesh: &Mesh, k: usize, samples: usize, seed: u64) -> Result<InequalityProbe> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut out = InequalityProbe { trace: 0.0, inverse: 0.0 };
    for c in 0..mesh.num_cells() {
        let quad = cell_quadrature(mesh, c, quadrature_degree(k));
        let basis = CellBasis::with_quadrature(mesh, c, k, &quad)?;
        let cell = mesh.cell(c);
        let n = basis.dim();
        let (mut dx, mut dy) = (vec![0.0; n], vec![0.0; n]);
        for _ in 0..samples {
            let coef: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let cv = DVector::from_column_slice(&coef);
            let mass = cv.dot(&(basis.gram() * &cv));
            if mass <= 0.0 {
                continue;
            }
            let mut grad = 0.0;
            for (x, w) in quad.iter() {
                basis.eval_grad_into(x, &mut dx, &mut dy);
                let gx: f64 = coef.iter().zip(&dx).map(|(a, b)| a * b).sum();
                let gy: f64 = coef.iter().zip(&dy).map(|(a, b)| a * b).sum();
                grad += w * (gx * gx + gy * gy);
            }
            out.inverse = out.inverse.max(cell.diameter * (grad / mass).sqrt());
            for &e in &cell.edges {
                let eq = edge_quadrature(mesh, e, 2 * k);
                let tr = eq.integrate(|p| basis.eval_poly(&coef, p.x).powi(2));
                out.trace = out.trace.max(tr / (mass / cell.diameter));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProjectionErrors {
    /// `||w - Q_0 w||`
    pub value: f64,
    /// `||curl w - Q(curl w)||` with `Q` onto `P_{k-1}`.
    pub curl: f64,
}

/// Projection errors of a smooth field and of its curl.
pub fn projection_errors<W, C>(mesh: &Mesh, k: usize, w: W, curl: C) -> Result<ProjectionErrors>
where
    W: Fn(Point) -> Vector2<f64> + Sync,
    C: Fn(Point) -> f64 + Sync,
{
    let parts: Vec<(f64, f64)> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let quad = cell_quadrature(mesh, c, quadrature_degree(k));
            let fine = cell_quadrature(mesh, c, quadrature_degree(k) + 6);
            let b = CellBasis::with_quadrature(mesh, c, k, &quad)?;
            let t = CellBasis::with_quadrature(mesh, c, k - 1, &quad)?;
            let px = b.project(&quad, |x| w(x).x);
            let py = b.project(&quad, |x| w(x).y);
            let pc = t.project(&quad, &curl);
            let value = fine.integrate(|x| {
                let d = w(x) - Vector2::new(b.eval_poly(px.as_slice(), x), b.eval_poly(py.as_slice(), x));
                d.norm_squared()
            });
            let cerr = fine.integrate(|x| (curl(x) - t.eval_poly(pc.as_slice(), x)).powi(2));
            Ok((value, cerr))
        })
        .collect::<Result<Vec<_>>>()?;
    let (v, c) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(ProjectionErrors { value: v.sqrt(), curl: c.sqrt() })
}

/// `log2(e_h / e_{h/2})` for consecutive entries of a halving sequence.
pub fn observed_rates(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// A random vector polynomial of total degree `<= k` with exact Jacobian.
#[derive(Debug, Clone)]
pub struct RandomPoly {
    terms: Vec<(i32, i32, [f64; 2])>,
}

impl RandomPoly {
    pub fn new<R: Rng>(k: usize, rng: &mut R) -> Self {
        let terms = crate::basis::exponents(k)
            .into_iter()
            .map(|(a, b)| (a as i32, b as i32, [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]))
            .collect();
        Self { terms }
    }

    pub fn value(&self, x: Point) -> Vector2<f64> {
        self.terms.iter().fold(Vector2::zeros(), |acc, &(a, b, c)| {
            acc + Vector2::new(c[0], c[1]) * (x.x.powi(a) * x.y.powi(b))
        })
    }

    pub fn jacobian(&self, x: Point) -> Matrix2<f64> {
        self.terms.iter().fold(Matrix2::zeros(), |acc, &(a, b, c)| {
            let dx = if a > 0 { a as f64 * x.x.powi(a - 1) * x.y.powi(b) } else { 0.0 };
            let dy = if b > 0 { b as f64 * x.x.powi(a) * x.y.powi(b - 1) } else { 0.0 };
            acc + Matrix2::new(c[0] * dx, c[0] * dy, c[1] * dx, c[1] * dy)
        })
    }
}

/// Triangle with vertices in the unit square whose inradius estimate
/// `2|T| / |dT|` is at least a tenth of its diameter.
pub fn random_triangle<R: Rng>(rng: &mut R) -> Mesh {
    loop {
        let v: Vec<Point> = (0..3).map(|_| Vector2::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))).collect();
        let sides = [(v[1] - v[0]).norm(), (v[2] - v[1]).norm(), (v[0] - v[2]).norm()];
        let area = 0.5 * (v[1] - v[0]).perp(&(v[2] - v[0])).abs();
        let diam = sides.iter().cloned().fold(0.0, f64::max);
        if 2.0 * area / sides.iter().sum::<f64>() < 0.1 * diam {
            continue;
        }
        if let Ok(m) = Mesh::from_cells(v, vec![vec![0, 1, 2]]) {
            return m;
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CommutativityProbe {
    pub cells: usize,
    pub divergence: f64,
    pub curl: f64,
}

/// Commutativity residuals for random polynomials of degree `<= k` on
/// random triangles, with coefficient `c` inside the divergence.
pub fn commutativity_probe(k: usize, cells: usize, c: Matrix2<f64>, seed: u64) -> Result<CommutativityProbe> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut out = CommutativityProbe { cells, divergence: 0.0, curl: 0.0 };
    for _ in 0..cells {
        let mesh = random_triangle(&mut rng);
        let w = RandomPoly::new(k, &mut rng);
        let r = crate::weakops::check_commutativity(&mesh, k, |_| c, |x| w.value(x), |x| w.jacobian(x))?;
        out.divergence = out.divergence.max(r.divergence);
        out.curl = out.curl.max(r.curl);
    }
    Ok(out)
}
