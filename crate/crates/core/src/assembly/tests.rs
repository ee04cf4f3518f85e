use super::*;
use crate::basis::quadrature::{cell_quadrature, edge_quadrature};
use crate::basis::EdgeBasis;
use crate::mesh::Rect;
use crate::solver;
use approx::assert_relative_eq;
use nalgebra::Vector2;
use rand::{Rng, SeedableRng};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn unit_mesh(n: usize) -> Mesh {
    Mesh::structured_triangulation(n, Rect::unit_square()).unwrap()
}

fn aniso(mesh: &Mesh) -> CoefficientField {
    CoefficientField::from_fn(
        mesh,
        |cell| {
            let s = 1.0 + 0.1 * (cell % 3) as f64;
            Material::new(Matrix2::new(2.0 * s, 0.5, 0.5, 1.0), Matrix2::new(1.0, 0.2, 0.2, 1.5), s)
        },
        1.3,
    )
    .unwrap()
}

fn random_vector(rng: &mut rand::rngs::StdRng, n: usize) -> DVector<Complex64> {
    DVector::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

#[test]
fn single_cell_dimension() {
    let m = Mesh::from_cells(
        vec![Vector2::new(0.0, 0.0), Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)],
        vec![vec![0, 1, 2]],
    )
    .unwrap();
    let coeff = CoefficientField::uniform(1, Material::vacuum(), 1.0).unwrap();
    let sys = assemble_electric(&m, &coeff, 1, &SourceData::zero(Kind::Electric)).unwrap();
    // 2 * 3 + 3 * 2 * 2 - 3 * 2 + 1
    assert_eq!(sys.dim(), 13);
    let sys = assemble_magnetic(&m, &coeff, 1, &SourceData::zero(Kind::Magnetic)).unwrap();
    assert_eq!(sys.dim(), 14);
}

#[test]
fn zero_weak_function_gives_zero_row() {
    let m = unit_mesh(2);
    let disc = Discretization::new(&m, &aniso(&m), 2, Kind::Electric).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(1);
    let w = random_vector(&mut rng, disc.dofmap.len());
    let zero = DVector::from_element(disc.dofmap.len(), c(0.0));
    assert_eq!(disc.bilinear_a(&zero, &w), c(0.0));
}

#[test]
fn field_block_is_complex_symmetric() {
    let m = unit_mesh(3);
    for kind in [Kind::Electric, Kind::Magnetic] {
        let disc = Discretization::new(&m, &aniso(&m), 2, kind).unwrap();
        let sys = disc.assemble_unconstrained(&SourceData::zero(kind)).unwrap();
        let nv = disc.dofmap.num_vector();
        let a = &sys.matrix;
        let scale = a.max_abs();
        for j in 0..nv {
            for (i, v) in a.column(j) {
                if i < nv {
                    assert!((v - a.get(j, i)).norm() <= 1e-12 * scale, "{kind} ({i}, {j})");
                }
            }
        }
        // off-diagonal blocks are -B^T and B
        for j in nv..disc.dofmap.num_vector() + disc.dofmap.num_cells * disc.dofmap.n_mult {
            for (i, v) in a.column(j) {
                if i < nv {
                    assert_eq!(v, -a.get(j, i));
                }
            }
        }
    }
}

/// `b_1(v, q) = -sum_T (eps v_0, grad q)_T + sum_e <v_b . n_e, [q]>_e`,
/// evaluated from point values of the polynomials.
#[test]
fn b_matches_edge_jump_form() {
    let m = unit_mesh(3);
    let coeff = aniso(&m);
    let k = 2;
    let disc = Discretization::new(&m, &coeff, k, Kind::Electric).unwrap();
    let dm = &disc.dofmap;
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    for _ in 0..3 {
        let v = random_vector(&mut rng, dm.len());
        let q = random_vector(&mut rng, dm.len());
        let lhs = disc.bilinear_b(&v, &q);

        let eval_q = |cell: usize, x: Point| -> Complex64 {
            let b = &disc.ops[cell].test_basis;
            let vals = b.eval(x);
            (0..dm.n_mult).map(|l| q[dm.mult(cell, l)] * vals[l]).sum()
        };
        let mut rhs = c(0.0);
        for cell in 0..m.num_cells() {
            let op = &disc.ops[cell];
            let eps = coeff.material(cell).eps;
            let quad = cell_quadrature(&m, cell, 8);
            let mut dx = vec![0.0; dm.n_mult];
            let mut dy = vec![0.0; dm.n_mult];
            for (x, w) in quad.iter() {
                let mv = op.basis.eval(x);
                let v0: Vec<Complex64> = (0..2)
                    .map(|comp| (0..dm.n_cell).map(|i| v[dm.cell_dof(cell, comp, i)] * mv[i]).sum())
                    .collect();
                op.test_basis.eval_grad_into(x, &mut dx, &mut dy);
                let gq: Vec<Complex64> = [&dx, &dy]
                    .iter()
                    .map(|d| (0..dm.n_mult).map(|l| q[dm.mult(cell, l)] * d[l]).sum())
                    .collect();
                let ev = [eps[(0, 0)] * v0[0] + eps[(0, 1)] * v0[1], eps[(1, 0)] * v0[0] + eps[(1, 1)] * v0[1]];
                rhs -= (ev[0] * gq[0] + ev[1] * gq[1]) * w;
            }
        }
        for e in 0..m.num_edges() {
            let eb = EdgeBasis::new(&m, e, k);
            for (p, w) in edge_quadrature(&m, e, 8).iter() {
                let psi = eb.eval(p.s);
                let vn: Complex64 = (0..dm.n_edge).map(|i| v[dm.edge_normal(e, i)] * psi[i]).sum();
                let jump_re = m.jump(e, p.x, |cell, x| eval_q(cell, x).re).unwrap();
                let jump_im = m.jump(e, p.x, |cell, x| eval_q(cell, x).im).unwrap();
                rhs += vn * Complex64::new(jump_re, jump_im) * w;
            }
        }
        assert!((lhs - rhs).norm() <= 1e-11 * rhs.norm(), "{lhs} vs {rhs}");
    }
}

#[test]
fn stabilizer_zero_for_continuous_polynomial() {
    let m = unit_mesh(3);
    let coeff = CoefficientField::uniform(m.num_cells(), Material::vacuum(), 1.0).unwrap();
    let disc = Discretization::new(&m, &coeff, 2, Kind::Electric).unwrap();
    let u = |_: usize, x: Point| [c(1.0 + x.x * x.y), c(x.y * x.y - 2.0 * x.x)];
    let v = disc.interpolate(u, None::<fn(usize, Point) -> Complex64>).unwrap();
    assert!(disc.stabilizer(&v, &v).norm() < 1e-13);
}

#[test]
fn stabilizer_single_boundary_normal() {
    let m = unit_mesh(2);
    let coeff = CoefficientField::uniform(m.num_cells(), Material::vacuum(), 1.0).unwrap();
    for k in [1, 2, 3] {
        let disc = Discretization::new(&m, &coeff, k, Kind::Electric).unwrap();
        let e = m.boundary_edges().next().unwrap();
        let mut v = DVector::from_element(disc.dofmap.len(), c(0.0));
        // boundary n_e is outward, so v_b = n has normal coefficient 1
        v[disc.dofmap.edge_normal(e, 0)] = c(1.0);
        let cell = m.edge(e).plus_cell();
        let want = m.edge(e).length / m.cell(cell).diameter;
        assert_relative_eq!(disc.stabilizer(&v, &v).re, want, max_relative = 1e-13);
        assert_eq!(disc.stabilizer(&v, &v).im, 0.0);
    }
}

#[test]
fn stabilizer_matches_dense_quadrature() {
    let m = unit_mesh(2);
    let coeff = aniso(&m);
    let k = 2;
    let disc = Discretization::new(&m, &coeff, k, Kind::Electric).unwrap();
    let dm = &disc.dofmap;
    let mut rng = rand::rngs::StdRng::seed_from_u64(9);
    let v = random_vector(&mut rng, dm.len());
    let w = random_vector(&mut rng, dm.len());
    let mut oracle = c(0.0);
    for cell in 0..m.num_cells() {
        let eps = coeff.material(cell).eps;
        let op = &disc.ops[cell];
        let h = m.cell(cell).diameter;
        for (&e, &s) in m.cell(cell).edges.iter().zip(&m.cell(cell).signs) {
            let edge = m.edge(e);
            let n = edge.normal * s;
            let eb = EdgeBasis::new(&m, e, k);
            for (p, wt) in edge_quadrature(&m, e, 10).iter() {
                let mv = op.basis.eval(p.x);
                let psi = eb.eval(p.s);
                let pair = |f: &DVector<Complex64>| {
                    let v0: Vec<Complex64> = (0..2)
                        .map(|comp| (0..dm.n_cell).map(|i| f[dm.cell_dof(cell, comp, i)] * mv[i]).sum())
                        .collect();
                    let a: Complex64 = (0..dm.n_edge).map(|i| f[dm.edge_normal(e, i)] * psi[i]).sum();
                    let b: Complex64 = (0..dm.n_edge).map(|i| f[dm.edge_tangential(e, i)] * psi[i]).sum();
                    let vb = [edge.normal.x * a + edge.tangent.x * b, edge.normal.y * a + edge.tangent.y * b];
                    let ev0 = [eps[(0, 0)] * v0[0] + eps[(0, 1)] * v0[1], eps[(1, 0)] * v0[0] + eps[(1, 1)] * v0[1]];
                    let normal = (ev0[0] - vb[0]) * n.x + (ev0[1] - vb[1]) * n.y;
                    let d = [v0[0] - vb[0], v0[1] - vb[1]];
                    let cross = d[0] * n.y - d[1] * n.x;
                    (normal, cross)
                };
                let (nv, tv) = pair(&v);
                let (nw, tw) = pair(&w);
                oracle += (nv * nw + tv * tw) * (wt / h);
            }
        }
    }
    let got = disc.stabilizer(&v, &w);
    assert!((got - oracle).norm() <= 1e-11 * oracle.norm());
}

#[test]
fn mean_constraint_row() {
    let m = Mesh::structured_triangulation(3, Rect::new(0.0, 0.0, 2.0, 1.5)).unwrap();
    let coeff = CoefficientField::uniform(m.num_cells(), Material::vacuum(), 1.0).unwrap();
    let disc = Discretization::new(&m, &coeff, 2, Kind::Magnetic).unwrap();
    let sys = disc.assemble_unconstrained(&SourceData::zero(Kind::Magnetic)).unwrap();
    let dm = &disc.dofmap;
    let row = dm.constraint().unwrap();
    let mut one = DVector::from_element(dm.len(), c(0.0));
    for cell in 0..dm.num_cells {
        one[dm.mult(cell, 0)] = c(1.0);
    }
    let y = sys.matrix.mul_vec(&one);
    assert_relative_eq!(y[row].re, 3.0, max_relative = 1e-13);
}

#[test]
fn magnetic_b_single_interior_edge() {
    let m = unit_mesh(2);
    let coeff = aniso(&m);
    let k = 2;
    let disc = Discretization::new(&m, &coeff, k, Kind::Magnetic).unwrap();
    let dm = &disc.dofmap;
    let e = m.interior_edges().next().unwrap();
    let mut v = DVector::from_element(dm.len(), c(0.0));
    v[dm.edge_normal(e, 0)] = c(1.0);
    let mut rng = rand::rngs::StdRng::seed_from_u64(2);
    let q = random_vector(&mut rng, dm.len());
    let eval_q = |cell: usize, x: Point, part: fn(Complex64) -> f64| -> f64 {
        let vals = disc.ops[cell].test_basis.eval(x);
        (0..dm.n_mult).map(|l| part(q[dm.mult(cell, l)]) * vals[l]).sum()
    };
    let mut want = c(0.0);
    for (p, w) in edge_quadrature(&m, e, 6).iter() {
        let re = m.jump(e, p.x, |cell, x| eval_q(cell, x, |z| z.re)).unwrap();
        let im = m.jump(e, p.x, |cell, x| eval_q(cell, x, |z| z.im)).unwrap();
        want += Complex64::new(re, im) * w;
    }
    let got = disc.bilinear_b(&v, &q);
    assert!((got - want).norm() < 1e-12 * want.norm().max(1.0));
}

#[test]
fn masks_remove_expected_components() {
    let m = unit_mesh(3);
    let coeff = CoefficientField::uniform(m.num_cells(), Material::vacuum(), 1.0).unwrap();
    let nb = m.boundary_edges().count();
    for (kind, k) in [(Kind::Electric, 1), (Kind::Magnetic, 2)] {
        let disc = Discretization::new(&m, &coeff, k, kind).unwrap();
        let full = disc.assemble_unconstrained(&SourceData::zero(kind)).unwrap();
        let sys = apply_boundary_conditions(&full, &disc.boundary_data(&SourceData::zero(kind))).unwrap();
        assert_eq!(sys.dim(), disc.dofmap.len() - nb * (k + 1));
        for e in m.boundary_edges() {
            for i in 0..=k {
                let (gone, kept) = match kind {
                    Kind::Electric => (disc.dofmap.edge_tangential(e, i), disc.dofmap.edge_normal(e, i)),
                    Kind::Magnetic => (disc.dofmap.edge_normal(e, i), disc.dofmap.edge_tangential(e, i)),
                };
                assert!(!sys.free.contains(&gone));
                assert!(sys.free.contains(&kept));
            }
        }
    }
}

#[test]
fn boundary_data_length_is_checked() {
    let m = unit_mesh(1);
    let coeff = CoefficientField::uniform(m.num_cells(), Material::vacuum(), 1.0).unwrap();
    let disc = Discretization::new(&m, &coeff, 1, Kind::Electric).unwrap();
    let full = disc.assemble_unconstrained(&SourceData::zero(Kind::Electric)).unwrap();
    assert!(matches!(apply_boundary_conditions(&full, &[c(0.0)]), Err(Error::InvalidArgument(_))));
}

#[test]
fn lifted_value_is_read_back() {
    let m = unit_mesh(2);
    let coeff = aniso(&m);
    let disc = Discretization::new(&m, &coeff, 1, Kind::Electric).unwrap();
    let full = disc.assemble_unconstrained(&SourceData::zero(Kind::Electric)).unwrap();
    let masked = disc.dofmap.masked_dofs();
    let mut data = vec![c(0.0); masked.len()];
    let g = Complex64::new(0.75, -0.25);
    data[3] = g;
    let sys = apply_boundary_conditions(&full, &data).unwrap();
    let x = solver::solve(&sys.matrix, &sys.rhs).unwrap();
    let u = sys.expand(&x.solution);
    assert_eq!(u[masked[3]], g);
    // the full unconstrained residual vanishes on every free row
    let r = full.matrix.mul_vec(&u) - &full.rhs;
    let worst = sys.free.iter().map(|&d| r[d].norm()).fold(0.0, f64::max);
    assert!(worst < 1e-12);
}

#[test]
fn zero_sigma_is_rejected_at_assembly() {
    let m = unit_mesh(2);
    let coeff = CoefficientField::uniform(m.num_cells(), Material::isotropic(1.0, 1.0, 0.0), 1.0).unwrap();
    let r = assemble_electric(&m, &coeff, 1, &SourceData::zero(Kind::Electric));
    assert!(matches!(r, Err(Error::CoercivityPrecondition(_))));
}

#[test]
fn wrong_source_kind_is_rejected() {
    let m = unit_mesh(1);
    let coeff = CoefficientField::uniform(m.num_cells(), Material::vacuum(), 1.0).unwrap();
    assert!(assemble_magnetic(&m, &coeff, 1, &SourceData::zero(Kind::Electric)).is_err());
    let mut s = SourceData::zero(Kind::Magnetic);
    s.charge = Some(Arc::new(|_, _| c(1.0)));
    assert!(assemble_magnetic(&m, &coeff, 1, &s).is_err());
}

#[test]
fn assembly_is_reproducible() {
    let m = unit_mesh(4);
    let coeff = aniso(&m);
    let mut s = SourceData::zero(Kind::Electric);
    s.volume = Arc::new(|_, x| [c(x.x.sin()), Complex64::new(0.0, x.y)]);
    let a = assemble_electric(&m, &coeff, 2, &s).unwrap();
    let b = assemble_electric(&m, &coeff, 2, &s).unwrap();
    assert_eq!(a.matrix, b.matrix);
    assert_eq!(a.rhs, b.rhs);
}
