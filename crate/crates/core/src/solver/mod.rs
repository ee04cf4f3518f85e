//! Direct solution of the assembled complex systems.

pub mod lu;
pub mod sparse;

use std::time::Instant;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

pub use lu::{LuOptions, SparseLu};
pub use sparse::CscMatrix;

use crate::error::{Error, Result};

/// Relative residual above which a solve is flagged.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: DVector<Complex64>,
    /// `||A x - b|| / ||b||` against the original matrix (absolute when `b = 0`).
    pub relative_residual: f64,
    /// `min |pivot| / max |pivot|` of the factorization.
    pub pivot_ratio: f64,
    pub fill: usize,
    pub wall_time: f64,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub relative_residual: f64,
    pub pivot_ratio: f64,
    pub fill: usize,
    pub wall_time: f64,
    pub warning: Option<String>,
}

impl SolveReport {
    pub fn summary(&self) -> SolveSummary {
        SolveSummary {
            relative_residual: self.relative_residual,
            pivot_ratio: self.pivot_ratio,
            fill: self.fill,
            wall_time: self.wall_time,
            warning: self.warning.clone(),
        }
    }
}

pub fn relative_residual(a: &CscMatrix, x: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    let r = (a.mul_vec(x) - b).norm();
    let nb = b.norm();
    if nb > 0.0 {
        r / nb
    } else {
        r
    }
}

pub fn solve(a: &CscMatrix, b: &DVector<Complex64>) -> Result<SolveReport> {
    solve_with(a, b, LuOptions::default())
}

pub fn solve_with(a: &CscMatrix, b: &DVector<Complex64>, opts: LuOptions) -> Result<SolveReport> {
    if b.len() != a.nrows {
        return Err(Error::InvalidArgument(format!(
            "right-hand side has length {}, matrix has {} rows",
            b.len(),
            a.nrows
        )));
    }
    let start = Instant::now();
    let lu = SparseLu::factor(a, opts)?;
    let mut x = DVector::from_vec(lu.solve(b.as_slice()));
    let mut res = relative_residual(a, &x, b);
    // one step of iterative refinement when the first solve is loose
    if res > 1e-13 {
        let r = b - a.mul_vec(&x);
        let dx = DVector::from_vec(lu.solve(r.as_slice()));
        let refined = &x + dx;
        let res2 = relative_residual(a, &refined, b);
        if res2 < res {
            x = refined;
            res = res2;
        }
    }
    let wall_time = start.elapsed().as_secs_f64();
    let warning = (res > RESIDUAL_TOL || !res.is_finite()).then(|| {
        format!("relative residual {res:.3e} exceeds {RESIDUAL_TOL:.0e}")
    });
    if let Some(w) = &warning {
        log::warn!("{w}");
    }
    log::debug!("solved n = {} with fill {} in {:.3}s", a.nrows, lu.fill(), wall_time);
    Ok(SolveReport {
        solution: x,
        relative_residual: res,
        pivot_ratio: lu.pivot_ratio(),
        fill: lu.fill(),
        wall_time,
        warning,
    })
}
