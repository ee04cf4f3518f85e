//! Left-looking sparse LU with threshold partial pivoting.
//!
//! Column `k` of `L` and `U` is computed from a sparse triangular solve
//! `L x = A(:, q[k])` whose nonzero pattern comes from a depth-first search
//! in the graph of the already computed columns of `L`. The pivot is the
//! largest remaining entry, except that the diagonal entry `q[k]` is kept
//! when it is within `tol` of the largest.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::amd;
use faer::sparse::SymbolicSparseColMatRef;
use num_complex::Complex64;

use super::sparse::CscMatrix;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone)]
pub struct SparseLu {
    n: usize,
    /// Column permutation: step `k` eliminates column `q[k]`.
    q: Vec<usize>,
    /// Row permutation: row `i` is pivot row of step `pinv[i]`.
    pinv: Vec<usize>,
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<Complex64>,
    u_ptr: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<Complex64>,
    pub min_pivot: f64,
    pub max_pivot: f64,
}

/// Options for [`SparseLu::factor`].
#[derive(Debug, Clone, Copy)]
pub struct LuOptions {
    /// Diagonal preference threshold in `(0, 1]`; `1` is plain partial pivoting.
    pub pivot_tol: f64,
    /// Pivots below `singular_tol * max|A|` are treated as zero.
    pub singular_tol: f64,
    pub amd: bool,
}

impl Default for LuOptions {
    fn default() -> Self {
        Self { pivot_tol: 0.1, singular_tol: 1e-13, amd: true }
    }
}

/// Approximate minimum degree ordering of the pattern of `A + A^T`.
pub fn amd_ordering(a: &CscMatrix) -> Result<Vec<usize>> {
    let n = a.ncols;
    if n == 0 {
        return Ok(Vec::new());
    }
    let sym = SymbolicSparseColMatRef::new_checked(n, n, &a.col_ptr, None, &a.row_idx);
    let mut perm = vec![0usize; n];
    let mut perm_inv = vec![0usize; n];
    let mut mem = MemBuffer::new(amd::order_scratch::<usize>(n, a.nnz()));
    amd::order(&mut perm, &mut perm_inv, sym, amd::Control::default(), MemStack::new(&mut mem))
        .map_err(|e| Error::InvalidArgument(format!("ordering failed: {e:?}")))?;
    Ok(perm)
}

impl SparseLu {
    pub fn factor(a: &CscMatrix, opts: LuOptions) -> Result<Self> {
        if a.nrows != a.ncols {
            return Err(Error::InvalidArgument(format!(
                "matrix must be square, got {}x{}",
                a.nrows, a.ncols
            )));
        }
        if !a.is_finite() {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let n = a.ncols;
        let q = if opts.amd { amd_ordering(a)? } else { (0..n).collect() };
        let floor = opts.singular_tol * a.max_abs();

        const NONE: usize = usize::MAX;
        let mut pinv = vec![NONE; n];
        let mut l_ptr = Vec::with_capacity(n + 1);
        let mut u_ptr = Vec::with_capacity(n + 1);
        let cap = 4 * a.nnz() + n;
        let mut l_idx = Vec::with_capacity(cap);
        let mut l_val = Vec::with_capacity(cap);
        let mut u_idx = Vec::with_capacity(cap);
        let mut u_val = Vec::with_capacity(cap);

        let mut x = vec![ZERO; n];
        let mut xi = vec![0usize; n];
        let mut mark = vec![usize::MAX; n];
        let mut stack: Vec<(usize, usize)> = Vec::new();
        let (mut min_pivot, mut max_pivot) = (f64::INFINITY, 0.0f64);

        for k in 0..n {
            l_ptr.push(l_idx.len());
            u_ptr.push(u_idx.len());
            let col = q[k];

            // reach: topological order of the rows touched by L \ A(:, col)
            let mut top = n;
            for (i, _) in a.column(col) {
                if mark[i] == k {
                    continue;
                }
                mark[i] = k;
                stack.push((i, 0));
                while let Some(&(j, pos)) = stack.last() {
                    let jcol = pinv[j];
                    let mut next = None;
                    let mut p = pos;
                    if jcol != NONE {
                        // column jcol of L, skipping the unit diagonal
                        let start = l_ptr[jcol] + 1;
                        let end = l_ptr[jcol + 1];
                        while start + p < end {
                            let r = l_idx[start + p];
                            p += 1;
                            if mark[r] != k {
                                next = Some(r);
                                break;
                            }
                        }
                    }
                    stack.last_mut().unwrap().1 = p;
                    match next {
                        Some(r) => {
                            mark[r] = k;
                            stack.push((r, 0));
                        }
                        None => {
                            stack.pop();
                            top -= 1;
                            xi[top] = j;
                        }
                    }
                }
            }

            // numeric triangular solve
            for &i in &xi[top..n] {
                x[i] = ZERO;
            }
            for (i, v) in a.column(col) {
                x[i] = v;
            }
            for p in top..n {
                let j = xi[p];
                let jcol = pinv[j];
                if jcol == NONE {
                    continue;
                }
                let xj = x[j];
                for t in l_ptr[jcol] + 1..l_ptr[jcol + 1] {
                    x[l_idx[t]] -= l_val[t] * xj;
                }
            }

            // pivot choice
            let mut ipiv = NONE;
            let mut best = -1.0;
            for &i in &xi[top..n] {
                if pinv[i] == NONE {
                    let v = x[i].norm();
                    if v > best {
                        best = v;
                        ipiv = i;
                    }
                } else {
                    u_idx.push(pinv[i]);
                    u_val.push(x[i]);
                }
            }
            if ipiv == NONE || !(best > floor) {
                return Err(Error::SingularSystem { pivot: k, column: col });
            }
            if pinv[col] == NONE && x[col].norm() >= opts.pivot_tol * best {
                ipiv = col;
            }
            let pivot = x[ipiv];
            min_pivot = min_pivot.min(pivot.norm());
            max_pivot = max_pivot.max(pivot.norm());
            u_idx.push(k);
            u_val.push(pivot);
            pinv[ipiv] = k;
            l_idx.push(ipiv);
            l_val.push(Complex64::new(1.0, 0.0));
            for &i in &xi[top..n] {
                if pinv[i] == NONE {
                    l_idx.push(i);
                    l_val.push(x[i] / pivot);
                }
                x[i] = ZERO;
            }
        }
        l_ptr.push(l_idx.len());
        u_ptr.push(u_idx.len());
        for r in l_idx.iter_mut() {
            *r = pinv[*r];
        }
        Ok(Self { n, q, pinv, l_ptr, l_idx, l_val, u_ptr, u_idx, u_val, min_pivot, max_pivot })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn fill(&self) -> usize {
        self.l_idx.len() + self.u_idx.len()
    }

    /// `min |pivot| / max |pivot|`.
    pub fn pivot_ratio(&self) -> f64 {
        if self.n == 0 {
            1.0
        } else {
            self.min_pivot / self.max_pivot
        }
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut y = vec![ZERO; n];
        for i in 0..n {
            y[self.pinv[i]] = b[i];
        }
        // L y = P b, unit diagonal first in each column
        for j in 0..n {
            let yj = y[j];
            for p in self.l_ptr[j] + 1..self.l_ptr[j + 1] {
                y[self.l_idx[p]] -= self.l_val[p] * yj;
            }
        }
        // U z = y, diagonal last in each column
        for j in (0..n).rev() {
            let last = self.u_ptr[j + 1] - 1;
            y[j] /= self.u_val[last];
            let yj = y[j];
            for p in self.u_ptr[j]..last {
                y[self.u_idx[p]] -= self.u_val[p] * yj;
            }
        }
        let mut x = vec![ZERO; n];
        for k in 0..n {
            x[self.q[k]] = y[k];
        }
        x
    }
}
