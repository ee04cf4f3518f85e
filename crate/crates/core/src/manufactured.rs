//! Manufactured solutions: closed-form fields with hand-written first and
//! second derivatives, and the sources they induce.
//!
//! Electric strong form, with `curl c = (dy c, -dx c)` for a scalar `c`:
//!   curl(mu_z^{-1} curl u) + (i omega sigma - omega^2 eps) u + eps grad p = -i omega j_e
//!   div(eps u) = rho
//! Magnetic strong form:
//!   curl(kappa curl u) + i omega mu u + mu grad p = eta,  div(mu u) = 0,
//!   kappa = (i omega eps_z + sigma)^{-1}, and kappa curl u = 0 on the boundary.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::assembly::{CoefficientField, Kind, Material, SourceData};
use crate::basis::quadrature::{cell_quadrature, edge_quadrature};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point, Rect};

/// One smooth branch of a manufactured field.
#[derive(Clone, Copy)]
pub struct Branch {
    pub u: fn(Point) -> Vector2<f64>,
    /// `J[(i, j)] = d u_i / d x_j`
    pub jac: fn(Point) -> Matrix2<f64>,
    /// Hessians of `u_1` and `u_2`.
    pub hess: fn(Point) -> [Matrix2<f64>; 2],
    pub p: fn(Point) -> f64,
    pub grad_p: fn(Point) -> Vector2<f64>,
}

impl Branch {
    pub fn curl(&self, x: Point) -> f64 {
        let j = (self.jac)(x);
        j[(1, 0)] - j[(0, 1)]
    }

    pub fn grad_curl(&self, x: Point) -> Vector2<f64> {
        let [h1, h2] = (self.hess)(x);
        Vector2::new(h2[(0, 0)] - h1[(0, 1)], h2[(1, 0)] - h1[(1, 1)])
    }
}

#[derive(Clone)]
pub struct ExactCase {
    pub name: String,
    pub kind: Kind,
    pub domain: Rect,
    pub branches: Vec<Branch>,
    /// Branch index at a point; cells take the branch of their centroid.
    pub piece: fn(Point) -> usize,
    /// Material of each branch.
    pub materials: Vec<Material>,
    pub omega: f64,
    /// Whether the essential boundary component of `u` vanishes.
    pub homogeneous: bool,
    /// Total degree of `u` for polynomial cases.
    pub degree: Option<usize>,
    /// Whether `u` has the global smoothness the rate estimates assume.
    pub smooth: bool,
    pub note: &'static str,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn cvec(v: Vector2<Complex64>) -> [Complex64; 2] {
    [v.x, v.y]
}

/// Strong-form sources at `x` for branch `b` and material `m`:
/// `(j_e, rho)` for the electric problem, `(eta, 0)` for the magnetic one.
pub fn strong_sources(kind: Kind, b: &Branch, m: &Material, omega: f64, x: Point) -> ([Complex64; 2], Complex64) {
    let u = (b.u)(x).map(c);
    let gp = (b.grad_p)(x);
    let gc = b.grad_curl(x);
    let curl_curl = Vector2::new(c(gc.y), c(-gc.x));
    match kind {
        Kind::Electric => {
            let w = c(1.0 / m.mu_z);
            let mass = m.eps.map(c) * Complex64::new(-omega * omega, 0.0) + Matrix2::identity() * Complex64::new(0.0, omega * m.sigma);
            let f = curl_curl * w + mass * u + (m.eps * gp).map(c);
            let je = f * Complex64::new(0.0, 1.0 / omega);
            let rho = (m.eps * (b.jac)(x)).trace();
            (cvec(je), c(rho))
        }
        Kind::Magnetic => {
            let kappa = Complex64::new(m.sigma, omega * m.eps_z).inv();
            let eta = curl_curl * kappa + m.mu.map(c) * u * Complex64::new(0.0, omega) + (m.mu * gp).map(c);
            (cvec(eta), c(0.0))
        }
    }
}

impl ExactCase {
    pub fn cell_pieces(&self, mesh: &Mesh) -> Result<Vec<usize>> {
        (0..mesh.num_cells())
            .map(|cell| {
                let cc = mesh.cell(cell);
                let piece = (self.piece)(cc.centroid);
                for &v in &cc.vertices {
                    let x = mesh.vertices()[v];
                    let inside = x + (cc.centroid - x) * 1e-9;
                    if (self.piece)(inside) != piece {
                        return Err(Error::CaseValidation(format!(
                            "case `{}`: cell {cell} straddles a material interface",
                            self.name
                        )));
                    }
                }
                Ok(piece)
            })
            .collect()
    }

    /// Coefficients of the case on a mesh resolving its interfaces.
    pub fn coefficients(&self, mesh: &Mesh) -> Result<CoefficientField> {
        let pieces = self.cell_pieces(mesh)?;
        CoefficientField::from_fn(mesh, |cell| self.materials[pieces[cell]], self.omega)
    }

    pub fn branch_at(&self, x: Point) -> &Branch {
        &self.branches[(self.piece)(x)]
    }

    pub fn material_at(&self, x: Point) -> &Material {
        &self.materials[(self.piece)(x)]
    }

    /// `u` and `p` as functions of `(cell, x)` using each cell's branch.
    pub fn exact_fields(&self, mesh: &Mesh) -> Result<ExactFields> {
        let pieces = Arc::new(self.cell_pieces(mesh)?);
        Ok(ExactFields { branches: Arc::new(self.branches.clone()), pieces })
    }
}

/// Cellwise evaluation of a case's exact fields.
#[derive(Clone)]
pub struct ExactFields {
    branches: Arc<Vec<Branch>>,
    pieces: Arc<Vec<usize>>,
}

impl ExactFields {
    pub fn branch(&self, cell: usize) -> &Branch {
        &self.branches[self.pieces[cell]]
    }

    pub fn u(&self, cell: usize, x: Point) -> [Complex64; 2] {
        let v = (self.branch(cell).u)(x);
        [c(v.x), c(v.y)]
    }

    pub fn p(&self, cell: usize, x: Point) -> Complex64 {
        c((self.branch(cell).p)(x))
    }

    pub fn curl(&self, cell: usize, x: Point) -> f64 {
        self.branch(cell).curl(x)
    }
}

/// Continuity of the fields across interior edges whose two sides differ
/// in material or branch: `[C u . n_e]`, `[u . t_e]`, `[w curl u]` and `[p]`,
/// with `C` the flux coefficient and `w` the curl weight of the problem.
pub fn validate_interfaces(case: &ExactCase, mesh: &Mesh, coeff: &CoefficientField) -> Result<f64> {
    let fields = case.exact_fields(mesh)?;
    let kind = case.kind;
    let mut worst = 0.0f64;
    let mut scale = 1e-300f64;
    for e in mesh.interior_edges() {
        let edge = mesh.edge(e);
        let (a, b) = (edge.cells[0], edge.cells[1]);
        let same = coeff.material(a) == coeff.material(b) && fields.pieces[a] == fields.pieces[b];
        for (p, _) in edge_quadrature(mesh, e, 4).iter() {
            let eval = |cell: usize| {
                let br = fields.branch(cell);
                let u = (br.u)(p.x);
                let flux = (coeff.flux(kind, cell) * u).dot(&edge.normal);
                let tan = u.dot(&edge.tangent);
                let curl = coeff.curl_weight(kind, cell) * br.curl(p.x);
                (flux, tan, curl, (br.p)(p.x))
            };
            let (fa, ta, ca, pa) = eval(a);
            scale = scale.max(fa.abs()).max(ta.abs()).max(ca.norm()).max(pa.abs());
            if same {
                continue;
            }
            let (fb, tb, cb, pb) = eval(b);
            worst = worst.max((fa - fb).abs()).max((ta - tb).abs()).max((ca - cb).norm()).max((pa - pb).abs());
        }
    }
    let rel = worst / scale.max(1.0);
    if rel > 1e-10 {
        return Err(Error::CaseValidation(format!(
            "case `{}` is not a solution across material interfaces (jump {rel:.2e})",
            case.name
        )));
    }
    Ok(rel)
}

/// Sources for `case` on `mesh` with the given coefficients.
pub fn derive_sources(case: &ExactCase, mesh: &Mesh, coeff: &CoefficientField) -> Result<SourceData> {
    if coeff.num_cells() != mesh.num_cells() {
        return Err(Error::InvalidCoefficients("coefficient field does not match the mesh".into()));
    }
    let check = check_boundary(case, 200);
    if case.kind == Kind::Magnetic && check.natural > 1e-12 {
        return Err(Error::CaseValidation(format!(
            "case `{}` violates the natural condition curl u = 0 on the boundary ({:.2e})",
            case.name, check.natural
        )));
    }
    validate_interfaces(case, mesh, coeff)?;
    let fields = case.exact_fields(mesh)?;
    let materials: Arc<Vec<Material>> = Arc::new(coeff.materials().to_vec());
    let omega = coeff.omega();
    let kind = case.kind;
    let (f1, m1) = (fields.clone(), materials.clone());
    let volume = Arc::new(move |cell: usize, x: Point| strong_sources(kind, f1.branch(cell), &m1[cell], omega, x).0);
    let charge = match kind {
        Kind::Electric => {
            let (f2, m2) = (fields.clone(), materials.clone());
            Some(Arc::new(move |cell: usize, x: Point| strong_sources(kind, f2.branch(cell), &m2[cell], omega, x).1)
                as crate::assembly::ScalarSource)
        }
        Kind::Magnetic => None,
    };
    let boundary = if case.homogeneous {
        None
    } else {
        let f3 = fields.clone();
        Some(Arc::new(move |cell: usize, x: Point| f3.u(cell, x)) as crate::assembly::VectorSource)
    };
    Ok(SourceData { kind, volume, charge, boundary })
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct BoundaryCheck {
    /// `max |u x n|` (electric) or `max |mu u . n|` (magnetic) on the boundary.
    pub essential: f64,
    /// `max |p|` on the boundary, electric only.
    pub multiplier: f64,
    /// `max |curl u|` on the boundary, magnetic only.
    pub natural: f64,
    /// `|int p|`, magnetic only.
    pub mean: f64,
}

impl BoundaryCheck {
    /// Conditions the case claims to satisfy, within `tol`.
    pub fn passes(&self, case: &ExactCase, tol: f64) -> bool {
        let essential = !case.homogeneous || self.essential <= tol;
        essential && self.multiplier <= tol && self.natural <= tol && self.mean <= tol
    }
}

/// Boundary invariants at `samples` points spread over the domain boundary.
pub fn check_boundary(case: &ExactCase, samples: usize) -> BoundaryCheck {
    let r = case.domain;
    let per_side = samples.div_ceil(4).max(1);
    let mut out = BoundaryCheck::default();
    let sides = [
        (Vector2::new(r.x0, r.y0), Vector2::new(r.x1, r.y0), Vector2::new(0.0, -1.0)),
        (Vector2::new(r.x1, r.y0), Vector2::new(r.x1, r.y1), Vector2::new(1.0, 0.0)),
        (Vector2::new(r.x1, r.y1), Vector2::new(r.x0, r.y1), Vector2::new(0.0, 1.0)),
        (Vector2::new(r.x0, r.y1), Vector2::new(r.x0, r.y0), Vector2::new(-1.0, 0.0)),
    ];
    for (a, b, n) in sides {
        for i in 0..per_side {
            let t = (i as f64 + 0.5) / per_side as f64;
            let x = a + (b - a) * t;
            // evaluate just inside so piecewise cases pick the right branch
            let inside = x - n * 1e-12;
            let br = case.branch_at(inside);
            let m = case.material_at(inside);
            let u = (br.u)(x);
            match case.kind {
                Kind::Electric => {
                    out.essential = out.essential.max((u.x * n.y - u.y * n.x).abs());
                    out.multiplier = out.multiplier.max((br.p)(x).abs());
                }
                Kind::Magnetic => {
                    out.essential = out.essential.max((m.mu * u).dot(&n).abs());
                    out.natural = out.natural.max(br.curl(x).abs());
                }
            }
        }
    }
    if case.kind == Kind::Magnetic {
        if let Ok(mesh) = Mesh::structured_quadrilateral(8, r) {
            let total: f64 = (0..mesh.num_cells())
                .map(|cell| {
                    let q = cell_quadrature(&mesh, cell, 12);
                    q.integrate(|x| (case.branch_at(x).p)(x))
                })
                .sum();
            out.mean = total.abs();
        }
    }
    out
}

/// Largest relative discrepancy between the closed-form sources and sources
/// rebuilt from point values of `u` and `p` by central differences with
/// step `1e-4` times the domain size, over `points` random interior points.
pub fn fd_audit(case: &ExactCase, points: usize, seed: u64) -> f64 {
    let r = case.domain;
    let h = 1e-4 * r.width().max(r.height());
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    let mut diffs = Vec::new();
    for _ in 0..points {
        let x = Vector2::new(rng.gen_range(r.x0..r.x1), rng.gen_range(r.y0..r.y1));
        let br = *case.branch_at(x);
        let m = *case.material_at(x);
        let fd = fd_branch(&br, h);
        let (s1, r1) = strong_sources(case.kind, &br, &m, case.omega, x);
        let (s2, r2) = fd_sources(case.kind, &fd, &m, case.omega, x);
        scale = scale.max(s1[0].norm()).max(s1[1].norm()).max(r1.norm());
        diffs.push((s1[0] - s2[0]).norm().max((s1[1] - s2[1]).norm()).max((r1 - r2).norm()));
    }
    for d in diffs {
        worst = worst.max(d / scale.max(1e-300));
    }
    worst
}

struct FdBranch {
    u: fn(Point) -> Vector2<f64>,
    p: fn(Point) -> f64,
    h: f64,
}

fn fd_branch(b: &Branch, h: f64) -> FdBranch {
    FdBranch { u: b.u, p: b.p, h }
}

fn fd_sources(kind: Kind, b: &FdBranch, m: &Material, omega: f64, x: Point) -> ([Complex64; 2], Complex64) {
    let h = b.h;
    let ex = Vector2::new(h, 0.0);
    let ey = Vector2::new(0.0, h);
    let u = |p: Point| (b.u)(p);
    let dx = (u(x + ex) - u(x - ex)) / (2.0 * h);
    let dy = (u(x + ey) - u(x - ey)) / (2.0 * h);
    let dxx = (u(x + ex) - u(x) * 2.0 + u(x - ex)) / (h * h);
    let dyy = (u(x + ey) - u(x) * 2.0 + u(x - ey)) / (h * h);
    let dxy = (u(x + ex + ey) - u(x + ex - ey) - u(x - ex + ey) + u(x - ex - ey)) / (4.0 * h * h);
    let jac = Matrix2::new(dx.x, dy.x, dx.y, dy.y);
    // grad of curl u = dx u_2 - dy u_1
    let gc = Vector2::new(dxx.y - dxy.x, dxy.y - dyy.x);
    let gp = Vector2::new(
        ((b.p)(x + ex) - (b.p)(x - ex)) / (2.0 * h),
        ((b.p)(x + ey) - (b.p)(x - ey)) / (2.0 * h),
    );
    let branch = Branch {
        u: b.u,
        jac: |_| Matrix2::zeros(),
        hess: |_| [Matrix2::zeros(); 2],
        p: b.p,
        grad_p: |_| Vector2::zeros(),
    };
    // reuse the strong form with the numerical derivatives substituted
    let uc = (branch.u)(x).map(c);
    let curl_curl = Vector2::new(c(gc.y), c(-gc.x));
    match kind {
        Kind::Electric => {
            let mass = m.eps.map(c) * Complex64::new(-omega * omega, 0.0)
                + Matrix2::identity() * Complex64::new(0.0, omega * m.sigma);
            let f = curl_curl * c(1.0 / m.mu_z) + mass * uc + (m.eps * gp).map(c);
            (cvec(f * Complex64::new(0.0, 1.0 / omega)), c((m.eps * jac).trace()))
        }
        Kind::Magnetic => {
            let kappa = Complex64::new(m.sigma, omega * m.eps_z).inv();
            let eta = curl_curl * kappa + m.mu.map(c) * uc * Complex64::new(0.0, omega) + (m.mu * gp).map(c);
            (cvec(eta), c(0.0))
        }
    }
}

// ---------------------------------------------------------------------------
// shipped cases

fn zero2(_: Point) -> Vector2<f64> {
    Vector2::zeros()
}
fn zero22(_: Point) -> Matrix2<f64> {
    Matrix2::zeros()
}
fn zero_h(_: Point) -> [Matrix2<f64>; 2] {
    [Matrix2::zeros(); 2]
}
fn zero1(_: Point) -> f64 {
    0.0
}
fn one_piece(_: Point) -> usize {
    0
}

fn aniso_eps() -> Matrix2<f64> {
    Matrix2::new(2.0, 0.5, 0.5, 1.0)
}

fn single(
    name: &str,
    kind: Kind,
    branch: Branch,
    material: Material,
    homogeneous: bool,
    degree: Option<usize>,
    note: &'static str,
) -> ExactCase {
    ExactCase {
        name: name.to_string(),
        kind,
        domain: Rect::unit_square(),
        branches: vec![branch],
        piece: one_piece,
        materials: vec![material],
        omega: 1.0,
        homogeneous,
        degree,
        smooth: true,
        note,
    }
}

/// `u = (cos pi x sin pi y, 2 sin pi x cos pi y)`, `p = sin pi x sin pi y`.
pub fn electric_trig() -> ExactCase {
    let branch = Branch {
        u: |x| {
            let (sx, cx, sy, cy) = ((PI * x.x).sin(), (PI * x.x).cos(), (PI * x.y).sin(), (PI * x.y).cos());
            Vector2::new(cx * sy, 2.0 * sx * cy)
        },
        jac: |x| {
            let (sx, cx, sy, cy) = ((PI * x.x).sin(), (PI * x.x).cos(), (PI * x.y).sin(), (PI * x.y).cos());
            Matrix2::new(-PI * sx * sy, PI * cx * cy, 2.0 * PI * cx * cy, -2.0 * PI * sx * sy)
        },
        hess: |x| {
            let (sx, cx, sy, cy) = ((PI * x.x).sin(), (PI * x.x).cos(), (PI * x.y).sin(), (PI * x.y).cos());
            let p2 = PI * PI;
            [
                Matrix2::new(-p2 * cx * sy, -p2 * sx * cy, -p2 * sx * cy, -p2 * cx * sy),
                Matrix2::new(-2.0 * p2 * sx * cy, -2.0 * p2 * cx * sy, -2.0 * p2 * cx * sy, -2.0 * p2 * sx * cy),
            ]
        },
        p: |x| (PI * x.x).sin() * (PI * x.y).sin(),
        grad_p: |x| {
            Vector2::new(PI * (PI * x.x).cos() * (PI * x.y).sin(), PI * (PI * x.x).sin() * (PI * x.y).cos())
        },
    };
    single(
        "electric-trig",
        Kind::Electric,
        branch,
        Material::new(aniso_eps(), Matrix2::identity(), 1.0),
        true,
        None,
        "smooth; u x n = 0 and p = 0 on the boundary",
    )
}

/// `u = (2 sin pi x cos pi y, -cos pi x sin pi y)`, `p = cos pi x cos pi y`,
/// with `mu = diag(1, 2)` so that `div(mu u) = 0`.
pub fn magnetic_trig() -> ExactCase {
    let branch = Branch {
        u: |x| {
            let (sx, cx, sy, cy) = ((PI * x.x).sin(), (PI * x.x).cos(), (PI * x.y).sin(), (PI * x.y).cos());
            Vector2::new(2.0 * sx * cy, -cx * sy)
        },
        jac: |x| {
            let (sx, cx, sy, cy) = ((PI * x.x).sin(), (PI * x.x).cos(), (PI * x.y).sin(), (PI * x.y).cos());
            Matrix2::new(2.0 * PI * cx * cy, -2.0 * PI * sx * sy, PI * sx * sy, -PI * cx * cy)
        },
        hess: |x| {
            let (sx, cx, sy, cy) = ((PI * x.x).sin(), (PI * x.x).cos(), (PI * x.y).sin(), (PI * x.y).cos());
            let p2 = PI * PI;
            [
                Matrix2::new(-2.0 * p2 * sx * cy, -2.0 * p2 * cx * sy, -2.0 * p2 * cx * sy, -2.0 * p2 * sx * cy),
                Matrix2::new(p2 * cx * sy, p2 * sx * cy, p2 * sx * cy, p2 * cx * sy),
            ]
        },
        p: |x| (PI * x.x).cos() * (PI * x.y).cos(),
        grad_p: |x| {
            Vector2::new(-PI * (PI * x.x).sin() * (PI * x.y).cos(), -PI * (PI * x.x).cos() * (PI * x.y).sin())
        },
    };
    let mut m = Material::new(Matrix2::identity() * 2.0, Matrix2::new(1.0, 0.0, 0.0, 2.0), 1.0);
    m.eps_z = 2.0;
    single(
        "magnetic-trig",
        Kind::Magnetic,
        branch,
        m,
        true,
        None,
        "smooth; mu u . n = 0, curl u = 0 on the boundary, mean-zero p",
    )
}

/// `u = x y (1 - x)(1 - y) (-y, x)`, `p = 0`; vanishes on the boundary.
pub fn electric_bubble() -> ExactCase {
    // b = x y (1-x)(1-y) = (x - x^2)(y - y^2)
    fn parts(x: Point) -> (f64, f64, f64, f64, f64, f64) {
        let (a, b) = (x.x - x.x * x.x, x.y - x.y * x.y);
        let (da, db) = (1.0 - 2.0 * x.x, 1.0 - 2.0 * x.y);
        (a, b, da, db, -2.0, -2.0)
    }
    let branch = Branch {
        u: |x| {
            let (a, b, ..) = parts(x);
            Vector2::new(-x.y * a * b, x.x * a * b)
        },
        jac: |x| {
            let (a, b, da, db, ..) = parts(x);
            // u_1 = -y a b, u_2 = x a b
            Matrix2::new(-x.y * da * b, -a * (b + x.y * db), a * b + x.x * da * b, x.x * a * db)
        },
        hess: |x| {
            let (a, b, da, db, dda, ddb) = parts(x);
            let h1 = Matrix2::new(
                -x.y * dda * b,
                -da * (b + x.y * db),
                -da * (b + x.y * db),
                -a * (2.0 * db + x.y * ddb),
            );
            let h2 = Matrix2::new(
                (2.0 * da + x.x * dda) * b,
                (a + x.x * da) * db,
                (a + x.x * da) * db,
                x.x * a * ddb,
            );
            [h1, h2]
        },
        p: zero1,
        grad_p: zero2,
    };
    single(
        "electric-bubble",
        Kind::Electric,
        branch,
        Material::vacuum(),
        true,
        Some(5),
        "polynomial bubble; u = 0 on the boundary",
    )
}

/// Linear field, `p = 0`, nonzero tangential boundary data.
pub fn electric_poly1() -> ExactCase {
    let branch = Branch {
        u: |x| Vector2::new(1.0 + 2.0 * x.x - x.y, 3.0 - x.x + 4.0 * x.y),
        jac: |_| Matrix2::new(2.0, -1.0, -1.0, 4.0),
        hess: zero_h,
        p: zero1,
        grad_p: zero2,
    };
    single("electric-poly1", Kind::Electric, branch, Material::vacuum(), false, Some(1), "linear; inhomogeneous u x n")
}

/// Quadratic field, `p = 0`, nonzero tangential boundary data.
pub fn electric_poly2() -> ExactCase {
    let branch = Branch {
        u: |x| Vector2::new(1.0 + x.x * x.y - x.y * x.y + 2.0 * x.x, x.x * x.x - 3.0 * x.x * x.y + x.y),
        jac: |x| Matrix2::new(x.y + 2.0, x.x - 2.0 * x.y, 2.0 * x.x - 3.0 * x.y, -3.0 * x.x + 1.0),
        hess: |_| [Matrix2::new(0.0, 1.0, 1.0, -2.0), Matrix2::new(2.0, -3.0, -3.0, 0.0)],
        p: zero1,
        grad_p: zero2,
    };
    single("electric-poly2", Kind::Electric, branch, Material::vacuum(), false, Some(2), "quadratic; inhomogeneous u x n")
}

/// `u = grad(x^2 - y^2 + 3x + y)`, divergence and curl free, `p = 0`.
pub fn magnetic_poly1() -> ExactCase {
    let branch = Branch {
        u: |x| Vector2::new(2.0 * x.x + 3.0, -2.0 * x.y + 1.0),
        jac: |_| Matrix2::new(2.0, 0.0, 0.0, -2.0),
        hess: zero_h,
        p: zero1,
        grad_p: zero2,
    };
    single(
        "magnetic-poly1",
        Kind::Magnetic,
        branch,
        Material::vacuum(),
        false,
        Some(1),
        "harmonic gradient; inhomogeneous u . n",
    )
}

/// `u = grad(x^3 - 3 x y^2 + x^2 - y^2 + y)`, `p = x - 1/2`.
pub fn magnetic_poly2() -> ExactCase {
    let branch = Branch {
        u: |x| Vector2::new(3.0 * x.x * x.x - 3.0 * x.y * x.y + 2.0 * x.x, -6.0 * x.x * x.y - 2.0 * x.y + 1.0),
        jac: |x| Matrix2::new(6.0 * x.x + 2.0, -6.0 * x.y, -6.0 * x.y, -6.0 * x.x - 2.0),
        hess: |_| [Matrix2::new(6.0, 0.0, 0.0, -6.0), Matrix2::new(0.0, -6.0, -6.0, 0.0)],
        p: |x| x.x - 0.5,
        grad_p: |_| Vector2::new(1.0, 0.0),
    };
    single(
        "magnetic-poly2",
        Kind::Magnetic,
        branch,
        Material::vacuum(),
        false,
        Some(2),
        "harmonic gradient, linear mean-zero p; inhomogeneous u . n",
    )
}

const ALPHA: f64 = 3.0 * PI / 8.0;

/// Electric field in a medium with `eps = 1` for `x < 1/2` and `eps = 4`
/// for `x > 1/2`: `u = (sin(pi y) / eps, B(x) cos(pi y))` with
/// `B = sin(pi x) + alpha x` on the left and `sin(pi x) + alpha (1 - x)` on
/// the right, `alpha = 3 pi / 8`, which makes `eps u . n`, `u . t` and
/// `curl u` continuous across `x = 1/2`.
pub fn electric_interface() -> ExactCase {
    fn left(x: Point) -> bool {
        x.x < 0.5
    }
    fn eps_of(x: Point) -> f64 {
        if left(x) {
            1.0
        } else {
            4.0
        }
    }
    fn branch(side_left: bool) -> Branch {
        if side_left {
            Branch {
                u: |x| Vector2::new((PI * x.y).sin(), ((PI * x.x).sin() + ALPHA * x.x) * (PI * x.y).cos()),
                jac: |x| {
                    let b = (PI * x.x).sin() + ALPHA * x.x;
                    let db = PI * (PI * x.x).cos() + ALPHA;
                    Matrix2::new(0.0, PI * (PI * x.y).cos(), db * (PI * x.y).cos(), -PI * b * (PI * x.y).sin())
                },
                hess: |x| {
                    let b = (PI * x.x).sin() + ALPHA * x.x;
                    let db = PI * (PI * x.x).cos() + ALPHA;
                    let ddb = -PI * PI * (PI * x.x).sin();
                    let (sy, cy) = ((PI * x.y).sin(), (PI * x.y).cos());
                    [
                        Matrix2::new(0.0, 0.0, 0.0, -PI * PI * sy),
                        Matrix2::new(ddb * cy, -PI * db * sy, -PI * db * sy, -PI * PI * b * cy),
                    ]
                },
                p: |x| (PI * x.x).sin() * (PI * x.y).sin(),
                grad_p: |x| {
                    Vector2::new(PI * (PI * x.x).cos() * (PI * x.y).sin(), PI * (PI * x.x).sin() * (PI * x.y).cos())
                },
            }
        } else {
            Branch {
                u: |x| {
                    Vector2::new((PI * x.y).sin() / 4.0, ((PI * x.x).sin() + ALPHA * (1.0 - x.x)) * (PI * x.y).cos())
                },
                jac: |x| {
                    let b = (PI * x.x).sin() + ALPHA * (1.0 - x.x);
                    let db = PI * (PI * x.x).cos() - ALPHA;
                    Matrix2::new(0.0, PI * (PI * x.y).cos() / 4.0, db * (PI * x.y).cos(), -PI * b * (PI * x.y).sin())
                },
                hess: |x| {
                    let b = (PI * x.x).sin() + ALPHA * (1.0 - x.x);
                    let db = PI * (PI * x.x).cos() - ALPHA;
                    let ddb = -PI * PI * (PI * x.x).sin();
                    let (sy, cy) = ((PI * x.y).sin(), (PI * x.y).cos());
                    [
                        Matrix2::new(0.0, 0.0, 0.0, -PI * PI * sy / 4.0),
                        Matrix2::new(ddb * cy, -PI * db * sy, -PI * db * sy, -PI * PI * b * cy),
                    ]
                },
                p: |x| (PI * x.x).sin() * (PI * x.y).sin(),
                grad_p: |x| {
                    Vector2::new(PI * (PI * x.x).cos() * (PI * x.y).sin(), PI * (PI * x.x).sin() * (PI * x.y).cos())
                },
            }
        }
    }
    let _ = eps_of;
    ExactCase {
        name: "electric-interface".into(),
        kind: Kind::Electric,
        domain: Rect::unit_square(),
        branches: vec![branch(true), branch(false)],
        piece: |x| usize::from(!left(x)),
        materials: vec![Material::isotropic(1.0, 1.0, 1.0), Material::isotropic(4.0, 1.0, 1.0)],
        omega: 1.0,
        homogeneous: true,
        degree: None,
        smooth: false,
        note: "piecewise smooth across eps jump at x = 1/2; limited global regularity",
    }
}

/// `u = 0`, `p = 0`.
pub fn zero_case(kind: Kind) -> ExactCase {
    let branch = Branch { u: zero2, jac: zero22, hess: zero_h, p: zero1, grad_p: zero2 };
    let name = format!("{}-zero", kind.name());
    single(&name, kind, branch, Material::vacuum(), true, Some(0), "trivial")
}

pub const CASE_NAMES: &[&str] = &[
    "electric-trig",
    "magnetic-trig",
    "electric-bubble",
    "electric-poly1",
    "electric-poly2",
    "magnetic-poly1",
    "magnetic-poly2",
    "electric-interface",
    "electric-zero",
    "magnetic-zero",
];

pub fn case_by_name(name: &str) -> Result<ExactCase> {
    Ok(match name {
        "electric-trig" => electric_trig(),
        "magnetic-trig" => magnetic_trig(),
        "electric-bubble" => electric_bubble(),
        "electric-poly1" => electric_poly1(),
        "electric-poly2" => electric_poly2(),
        "magnetic-poly1" => magnetic_poly1(),
        "magnetic-poly2" => magnetic_poly2(),
        "electric-interface" => electric_interface(),
        "electric-zero" => zero_case(Kind::Electric),
        "magnetic-zero" => zero_case(Kind::Magnetic),
        other => return Err(Error::UnknownCase(other.to_string())),
    })
}

pub fn all_cases() -> Vec<ExactCase> {
    CASE_NAMES.iter().map(|n| case_by_name(n).expect("registered")).collect()
}
