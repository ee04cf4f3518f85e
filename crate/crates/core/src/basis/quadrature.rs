use nalgebra::Vector2;

use crate::mesh::{Mesh, Point};

/// Points and positive weights; integrates `f` as `sum w_i f(x_i)`.
#[derive(Debug, Clone)]
pub struct Quadrature<P> {
    pub points: Vec<P>,
    pub weights: Vec<f64>,
}

impl<P: Copy> Quadrature<P> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (P, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate<F: FnMut(P) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(p, w)| w * f(p)).sum()
    }
}

/// Gauss-Legendre rule with `n` points on `[-1, 1]`, exact to degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> Quadrature<f64> {
    assert!(n >= 1, "gauss-legendre rule needs at least one point");
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = -x;
        points[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    Quadrature { points, weights }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = if (1.0 - x * x).abs() < 1e-300 {
        // endpoint derivative n(n+1)/2 * x^(n+1)
        0.5 * (n * (n + 1)) as f64 * x.powi(n as i32 + 1)
    } else {
        n as f64 * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, d)
}

/// Number of Gauss points per direction needed for the collapsed triangle
/// rule to be exact at `degree`.
fn collapsed_points(degree: usize) -> usize {
    (degree + 2).div_ceil(2).max(1)
}

/// Collapsed (Duffy) Gauss rule on the triangle `(a, b, c)`, exact for
/// polynomials of total degree `<= degree`.
pub fn triangle_rule(a: Point, b: Point, c: Point, degree: usize) -> Quadrature<Point> {
    let n = collapsed_points(degree);
    let g = gauss_legendre(n);
    let det = ((b - a).x * (c - a).y - (b - a).y * (c - a).x).abs();
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (u, wu) in g.iter() {
        let u = 0.5 * (u + 1.0);
        for (v, wv) in g.iter() {
            let v = 0.5 * (v + 1.0);
            let p = a + ((b - a) * (1.0 - v) + (c - a) * v) * u;
            points.push(p);
            weights.push(0.25 * wu * wv * u * det);
        }
    }
    Quadrature { points, weights }
}

/// Rule on a convex cell: fan triangulation from the centroid with the
/// collapsed rule on each sub-triangle.
pub fn cell_quadrature(mesh: &Mesh, cell: usize, degree: usize) -> Quadrature<Point> {
    let c = mesh.cell(cell);
    let verts = mesh.vertices();
    let nv = c.vertices.len();
    let mut q = Quadrature { points: Vec::new(), weights: Vec::new() };
    for j in 0..nv {
        let a = verts[c.vertices[j]];
        let b = verts[c.vertices[(j + 1) % nv]];
        let t = triangle_rule(c.centroid, a, b, degree);
        q.points.extend(t.points);
        q.weights.extend(t.weights);
    }
    q
}

/// Point on an edge together with its arclength coordinate.
#[derive(Debug, Clone, Copy)]
pub struct EdgePoint {
    pub x: Point,
    /// Arclength from the lower-index endpoint.
    pub s: f64,
}

/// Gauss rule on edge `e`, exact for polynomials of degree `<= degree` in
/// the arclength parameter.
pub fn edge_quadrature(mesh: &Mesh, e: usize, degree: usize) -> Quadrature<EdgePoint> {
    let n = (degree + 2).div_ceil(2).max(1);
    let g = gauss_legendre(n);
    let edge = mesh.edge(e);
    let a = mesh.vertices()[edge.vertices[0]];
    let b = mesh.vertices()[edge.vertices[1]];
    let len = edge.length;
    let mut points = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (t, w) in g.iter() {
        let r = 0.5 * (t + 1.0);
        points.push(EdgePoint { x: a + (b - a) * r, s: r * len });
        weights.push(0.5 * w * len);
    }
    Quadrature { points, weights }
}

pub fn point(x: f64, y: f64) -> Point {
    Vector2::new(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Mesh, Rect};
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_monomials() {
        for n in 1..=8 {
            let g = gauss_legendre(n);
            assert!(g.weights.iter().all(|&w| w > 0.0));
            for p in 0..2 * n {
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                let got = g.integrate(|x| x.powi(p as i32));
                assert_relative_eq!(got, exact, epsilon = 1e-14);
            }
        }
    }

    fn reference_triangle() -> Mesh {
        Mesh::from_cells(
            vec![point(0.0, 0.0), point(1.0, 0.0), point(0.0, 1.0)],
            vec![vec![0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn reference_triangle_values() {
        let m = reference_triangle();
        let q = cell_quadrature(&m, 0, 4);
        assert_relative_eq!(q.integrate(|_| 1.0), 0.5, max_relative = 1e-14);
        // int_0^1 x^2 (1-x)^2 / 2 dx = 1/60
        assert_relative_eq!(q.integrate(|p| p.x * p.x * p.y), 1.0 / 60.0, max_relative = 1e-13);
    }

    #[test]
    fn unit_square_xy() {
        let m = Mesh::structured_quadrilateral(1, Rect::unit_square()).unwrap();
        let q = cell_quadrature(&m, 0, 2);
        assert_relative_eq!(q.integrate(|p| p.x * p.y), 0.25, max_relative = 1e-14);
    }

    /// int_T x^a y^b over the reference triangle = a! b! / (a + b + 2)!
    fn ref_monomial(a: u32, b: u32) -> f64 {
        let f = |n: u32| (1..=n).map(|i| i as f64).product::<f64>();
        f(a) * f(b) / f(a + b + 2)
    }

    #[test]
    fn exact_to_declared_degree() {
        let m = reference_triangle();
        for degree in 0..=10 {
            let q = cell_quadrature(&m, 0, degree);
            for a in 0..=degree as u32 {
                for b in 0..=(degree as u32 - a) {
                    let got = q.integrate(|p| p.x.powi(a as i32) * p.y.powi(b as i32));
                    assert_relative_eq!(got, ref_monomial(a, b), max_relative = 1e-13);
                }
            }
        }
    }

    #[test]
    fn edge_rule_length_and_moments() {
        let m = Mesh::structured_triangulation(3, Rect::new(0.0, 0.0, 2.0, 1.0)).unwrap();
        for e in 0..m.num_edges() {
            let q = edge_quadrature(&m, e, 6);
            let len = m.edge(e).length;
            assert_relative_eq!(q.integrate(|_| 1.0), len, max_relative = 1e-14);
            for p in 0..=6 {
                let got: f64 = q.iter().map(|(ep, w)| w * ep.s.powi(p)).sum();
                assert_relative_eq!(got, len.powi(p + 1) / (p as f64 + 1.0), max_relative = 1e-13);
            }
        }
    }
}
