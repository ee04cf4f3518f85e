//! Two-dimensional meshes of convex polygonal cells.
//!
//! Edges, normals and boundary flags are always derived from the vertex
//! loops; they are never read from input. Every edge carries a fixed unit
//! normal `n_e`. For an interior edge it points out of the adjacent cell with
//! the lower id and into the one with the higher id; for a boundary edge it is
//! the outward normal of the domain. Each cell records, per local edge, the
//! sign relating its own outward normal to `n_e`.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = Vector2<f64>;

/// Cells whose shape measure falls below this value trigger a warning.
pub const SHAPE_REGULARITY_WARN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn unit_square() -> Self {
        Self::new(0.0, 0.0, 1.0, 1.0)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    fn validate(&self) -> Result<()> {
        if !(self.width() > 0.0 && self.height() > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "rectangle must have positive width and height, got {}x{}",
                self.width(),
                self.height()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Edge {
    /// Endpoint vertex ids, smaller index first. The edge parameter runs
    /// from `vertices[0]` to `vertices[1]`.
    pub vertices: [usize; 2],
    /// Assigned unit normal `n_e`.
    pub normal: Point,
    /// `n_e` rotated counterclockwise by a quarter turn.
    pub tangent: Point,
    pub length: f64,
    /// Adjacent cells. `cells[0]` is the side whose outward normal is `n_e`.
    pub cells: [usize; 2],
    pub boundary: bool,
}

impl Edge {
    /// The cell on the `+1` side of the edge.
    pub fn plus_cell(&self) -> usize {
        self.cells[0]
    }

    /// The cell on the `-1` side, `None` on the boundary.
    pub fn minus_cell(&self) -> Option<usize> {
        (!self.boundary).then_some(self.cells[1])
    }
}

/// One side of an edge as seen from an adjacent cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeSide {
    pub edge: usize,
    pub cell: usize,
    /// `+1` if the cell-outward normal equals `n_e`, `-1` if it equals `-n_e`.
    pub sign: f64,
}

#[derive(Debug, Clone)]
pub struct Cell {
    /// Counterclockwise vertex loop.
    pub vertices: Vec<usize>,
    /// Local edge `j` joins `vertices[j]` and `vertices[j + 1]`.
    pub edges: Vec<usize>,
    pub signs: Vec<f64>,
    pub area: f64,
    pub centroid: Point,
    /// Largest pairwise vertex distance.
    pub diameter: f64,
}

#[derive(Debug, Clone)]
pub struct LocalEdge {
    pub edge: usize,
    pub sign: f64,
    pub outward_normal: Point,
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct ElementGeometry {
    pub diameter: f64,
    pub area: f64,
    pub centroid: Point,
    pub edges: Vec<LocalEdge>,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<Point>,
    cells: Vec<Cell>,
    edges: Vec<Edge>,
    h: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshFile {
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<Vec<usize>>,
}

impl Mesh {
    /// Builds a mesh from raw vertex loops. Loops given clockwise are
    /// reversed; non-convex or degenerate cells are rejected.
    pub fn from_cells(vertices: Vec<Point>, loops: Vec<Vec<usize>>) -> Result<Self> {
        if loops.is_empty() {
            return Err(Error::InvalidArgument("mesh has no cells".into()));
        }
        let mut cells = Vec::with_capacity(loops.len());
        for (c, mut lp) in loops.into_iter().enumerate() {
            if lp.len() < 3 {
                return Err(Error::MeshValidation(format!(
                    "cell {c} has {} vertices",
                    lp.len()
                )));
            }
            if let Some(&bad) = lp.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::MeshValidation(format!(
                    "cell {c} references missing vertex {bad}"
                )));
            }
            let signed = signed_area(&vertices, &lp);
            if signed < 0.0 {
                lp.reverse();
            }
            let area = signed.abs();
            let diameter = polygon_diameter(&vertices, &lp);
            if !(area > 1e-14 * diameter * diameter) {
                return Err(Error::MeshValidation(format!(
                    "cell {c} is degenerate (area {area:e})"
                )));
            }
            check_convex(&vertices, &lp, c, diameter)?;
            let centroid = polygon_centroid(&vertices, &lp, area);
            cells.push(Cell {
                vertices: lp,
                edges: Vec::new(),
                signs: Vec::new(),
                area,
                centroid,
                diameter,
            });
        }

        // (lo, hi) vertex pair -> edge id; edges are numbered in order of
        // first appearance while walking cells.
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        for c in 0..cells.len() {
            let nv = cells[c].vertices.len();
            for j in 0..nv {
                let a = cells[c].vertices[j];
                let b = cells[c].vertices[(j + 1) % nv];
                if a == b {
                    return Err(Error::MeshValidation(format!(
                        "cell {c} repeats vertex {a}"
                    )));
                }
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    None => {
                        let pa = vertices[key.0];
                        let pb = vertices[key.1];
                        let d = pb - pa;
                        let length = d.norm();
                        // outward normal of cell c on this edge
                        let dir = vertices[b] - vertices[a];
                        let normal = Vector2::new(dir.y, -dir.x) / length;
                        edges.push(Edge {
                            vertices: [key.0, key.1],
                            normal,
                            tangent: Vector2::new(-normal.y, normal.x),
                            length,
                            cells: [c, usize::MAX],
                            boundary: true,
                        });
                        lookup.insert(key, edges.len() - 1);
                        cells[c].edges.push(edges.len() - 1);
                        cells[c].signs.push(1.0);
                    }
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if !edge.boundary {
                            return Err(Error::MeshValidation(format!(
                                "edge {:?} is shared by more than two cells",
                                edge.vertices
                            )));
                        }
                        let first = edge.cells[0];
                        let first_cell = &cells[first];
                        let pos = first_cell.edges.iter().position(|&x| x == e).unwrap();
                        let fa = first_cell.vertices[pos];
                        if fa == a {
                            return Err(Error::MeshValidation(format!(
                                "cells {first} and {c} traverse edge {:?} in the same direction",
                                edge.vertices
                            )));
                        }
                        edge.cells[1] = c;
                        edge.boundary = false;
                        // first < c, so n_e (outward of `first`) already points
                        // from the lower id to the higher id.
                        cells[c].edges.push(e);
                        cells[c].signs.push(-1.0);
                    }
                }
            }
        }

        let h = cells.iter().map(|c| c.diameter).fold(0.0, f64::max);
        let mesh = Self {
            dim: 2,
            vertices,
            cells,
            edges,
            h,
        };
        let shape = mesh.shape_regularity();
        if shape < SHAPE_REGULARITY_WARN {
            log::warn!("mesh shape-regularity measure {shape:.3e} is below {SHAPE_REGULARITY_WARN}");
        }
        Ok(mesh)
    }

    /// Uniform triangulation of `rect` with `n` squares per side, each split
    /// along its lower-left to upper-right diagonal.
    pub fn structured_triangulation(n: usize, rect: Rect) -> Result<Self> {
        let vertices = grid_vertices(n, rect)?;
        let idx = |i: usize, j: usize| j * (n + 1) + i;
        let mut loops = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                loops.push(vec![a, b, c]);
                loops.push(vec![a, c, d]);
            }
        }
        Self::from_cells(vertices, loops)
    }

    /// Uniform mesh of `n x n` rectangles.
    pub fn structured_quadrilateral(n: usize, rect: Rect) -> Result<Self> {
        let vertices = grid_vertices(n, rect)?;
        let idx = |i: usize, j: usize| j * (n + 1) + i;
        let mut loops = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                loops.push(vec![idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        Self::from_cells(vertices, loops)
    }

    pub fn from_file_data(data: MeshFile) -> Result<Self> {
        let vertices = data.vertices.iter().map(|p| Vector2::new(p[0], p[1])).collect();
        Self::from_cells(vertices, data.cells)
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let data: MeshFile = serde_json::from_str(&text)?;
        Self::from_file_data(data)
    }

    pub fn to_file_data(&self) -> MeshFile {
        MeshFile {
            vertices: self.vertices.iter().map(|p| [p.x, p.y]).collect(),
            cells: self.cells.iter().map(|c| c.vertices.clone()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, c: usize) -> &Cell {
        &self.cells[c]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Global mesh size, the largest cell diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().enumerate().filter(|(_, e)| e.boundary).map(|(i, _)| i)
    }

    pub fn interior_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().enumerate().filter(|(_, e)| !e.boundary).map(|(i, _)| i)
    }

    /// Sides of edge `e`, the `+1` side first.
    pub fn edge_sides(&self, e: usize) -> Vec<EdgeSide> {
        let edge = &self.edges[e];
        let mut sides = vec![EdgeSide { edge: e, cell: edge.cells[0], sign: 1.0 }];
        if let Some(c) = edge.minus_cell() {
            sides.push(EdgeSide { edge: e, cell: c, sign: -1.0 });
        }
        sides
    }

    /// The side of edge `e` belonging to cell `c`.
    pub fn side(&self, e: usize, c: usize) -> Option<EdgeSide> {
        self.edge_sides(e).into_iter().find(|s| s.cell == c)
    }

    pub fn element_geometry(&self, c: usize) -> Result<ElementGeometry> {
        let cell = self.cells.get(c).ok_or_else(|| {
            Error::InvalidArgument(format!("cell {c} out of range ({} cells)", self.cells.len()))
        })?;
        if !(cell.area > 0.0) {
            return Err(Error::MeshValidation(format!("cell {c} has zero area")));
        }
        let edges = cell
            .edges
            .iter()
            .zip(&cell.signs)
            .map(|(&e, &s)| LocalEdge {
                edge: e,
                sign: s,
                outward_normal: self.edges[e].normal * s,
                length: self.edges[e].length,
            })
            .collect();
        Ok(ElementGeometry {
            diameter: cell.diameter,
            area: cell.area,
            centroid: cell.centroid,
            edges,
        })
    }

    /// Point on edge `e` at arclength `s` from its lower-index endpoint.
    pub fn edge_point(&self, e: usize, s: f64) -> Point {
        let edge = &self.edges[e];
        let a = self.vertices[edge.vertices[0]];
        let b = self.vertices[edge.vertices[1]];
        a + (b - a) * (s / edge.length)
    }

    /// Jump of a piecewise field across edge `e` at point `x`: the `+1`
    /// side trace minus the `-1` side trace, or the trace itself on the
    /// boundary. `q(cell, x)` evaluates the field restricted to `cell`.
    pub fn jump<F>(&self, e: usize, x: Point, q: F) -> Result<f64>
    where
        F: Fn(usize, Point) -> f64,
    {
        let edge = self
            .edges
            .get(e)
            .ok_or_else(|| Error::InvalidArgument(format!("edge {e} out of range")))?;
        Ok(match edge.minus_cell() {
            Some(minus) => q(edge.cells[0], x) - q(minus, x),
            None => q(edge.cells[0], x),
        })
    }

    /// `min_T (2 r_T / h_T)` with `r_T = 2|T| / |dT|`, the inscribed-circle
    /// radius for triangles and a lower estimate of it for other convex cells.
    pub fn shape_regularity(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| {
                let perimeter: f64 = c.edges.iter().map(|&e| self.edges[e].length).sum();
                let r = 2.0 * c.area / perimeter;
                self.dim as f64 * r / c.diameter
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the cell containing `x`, if any.
    pub fn locate(&self, x: Point) -> Option<usize> {
        self.cells.iter().position(|c| {
            let nv = c.vertices.len();
            (0..nv).all(|j| {
                let a = self.vertices[c.vertices[j]];
                let b = self.vertices[c.vertices[(j + 1) % nv]];
                let d = b - a;
                let w = x - a;
                d.x * w.y - d.y * w.x >= -1e-12 * c.diameter * c.diameter
            })
        })
    }
}

fn grid_vertices(n: usize, rect: Rect) -> Result<Vec<Point>> {
    if n == 0 {
        return Err(Error::InvalidArgument("number of subdivisions must be at least 1".into()));
    }
    rect.validate()?;
    let dx = rect.width() / n as f64;
    let dy = rect.height() / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let x = if i == n { rect.x1 } else { rect.x0 + i as f64 * dx };
            let y = if j == n { rect.y1 } else { rect.y0 + j as f64 * dy };
            vertices.push(Vector2::new(x, y));
        }
    }
    Ok(vertices)
}

fn signed_area(vertices: &[Point], lp: &[usize]) -> f64 {
    let n = lp.len();
    let mut a = 0.0;
    for j in 0..n {
        let p = vertices[lp[j]];
        let q = vertices[lp[(j + 1) % n]];
        a += p.x * q.y - q.x * p.y;
    }
    0.5 * a
}

fn polygon_centroid(vertices: &[Point], lp: &[usize], area: f64) -> Point {
    let n = lp.len();
    // shift to the first vertex for accuracy away from the origin
    let o = vertices[lp[0]];
    let mut c = Vector2::zeros();
    for j in 0..n {
        let p = vertices[lp[j]] - o;
        let q = vertices[lp[(j + 1) % n]] - o;
        let cross = p.x * q.y - q.x * p.y;
        c += (p + q) * cross;
    }
    o + c / (6.0 * area)
}

fn polygon_diameter(vertices: &[Point], lp: &[usize]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, &a) in lp.iter().enumerate() {
        for &b in &lp[i + 1..] {
            d = d.max((vertices[a] - vertices[b]).norm());
        }
    }
    d
}

fn check_convex(vertices: &[Point], lp: &[usize], c: usize, diameter: f64) -> Result<()> {
    let n = lp.len();
    let tol = 1e-12 * diameter * diameter;
    for j in 0..n {
        let a = vertices[lp[j]];
        let b = vertices[lp[(j + 1) % n]];
        let d = vertices[lp[(j + 2) % n]];
        let u = b - a;
        let w = d - b;
        if u.x * w.y - u.y * w.x <= tol {
            return Err(Error::MeshValidation(format!(
                "cell {c} is not strictly convex at vertex {}",
                lp[(j + 1) % n]
            )));
        }
    }
    Ok(())
}
