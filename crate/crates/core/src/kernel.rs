//! Semi-separable matrix kernels
//!
//! ```text
//! K(x, x') = f1(x) g1(x')   x' < x
//!            f2(x) g2(x')   x  < x'
//! ```
//!
//! with `f_j : m x n_j`, `g_j : n_j x m`. On the diagonal `K(x, x) = f1 g1`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, Interval};
use crate::matrix::ComplexMatrix;

pub type MatrixFn = Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync>;

#[derive(Clone)]
pub struct SemiSeparableKernel {
    m: usize,
    n1: usize,
    n2: usize,
    f1: MatrixFn,
    g1: MatrixFn,
    f2: MatrixFn,
    g2: MatrixFn,
    interval: Interval,
}

impl fmt::Debug for SemiSeparableKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemiSeparableKernel")
            .field("m", &self.m)
            .field("n1", &self.n1)
            .field("n2", &self.n2)
            .field("interval", &self.interval)
            .finish_non_exhaustive()
    }
}

impl SemiSeparableKernel {
    /// `m` must be positive; either of `n1`, `n2` may be zero (a pure
    /// Volterra kernel).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        m: usize,
        n1: usize,
        n2: usize,
        f1: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static,
        g1: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static,
        f2: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static,
        g2: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static,
        interval: Interval,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("kernel block size m must be positive".into()));
        }
        if n1 + n2 == 0 {
            return Err(Error::InvalidParameter("n1 + n2 must be positive".into()));
        }
        Ok(Self {
            m,
            n1,
            n2,
            f1: Arc::new(f1),
            g1: Arc::new(g1),
            f2: Arc::new(f2),
            g2: Arc::new(g2),
            interval,
        })
    }

    /// Scalar kernel (`m = n1 = n2 = 1`) from four complex functions.
    pub fn scalar(
        f1: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        g1: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        f2: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        g2: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        interval: Interval,
    ) -> Result<Self> {
        Self::new(
            1,
            1,
            1,
            move |x| ComplexMatrix::scalar(f1(x)),
            move |x| ComplexMatrix::scalar(g1(x)),
            move |x| ComplexMatrix::scalar(f2(x)),
            move |x| ComplexMatrix::scalar(g2(x)),
            interval,
        )
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn interval(&self) -> &Interval {
        &self.interval
    }

    /// Same factors on a different computational window.
    pub fn with_interval(&self, interval: Interval) -> Self {
        Self {
            interval,
            ..self.clone()
        }
    }

    fn checked(&self, which: &'static str, f: &MatrixFn, x: f64, rows: usize, cols: usize) -> Result<ComplexMatrix> {
        self.interval.check(x)?;
        let v = f(x);
        if v.shape() != (rows, cols) {
            return Err(Error::Shape {
                what: which,
                expected_rows: rows,
                expected_cols: cols,
                rows: v.rows(),
                cols: v.cols(),
            });
        }
        if !v.is_finite() {
            return Err(Error::NonFinite(which));
        }
        Ok(v)
    }

    pub fn f1(&self, x: f64) -> Result<ComplexMatrix> {
        self.checked("f1", &self.f1, x, self.m, self.n1)
    }

    pub fn g1(&self, x: f64) -> Result<ComplexMatrix> {
        self.checked("g1", &self.g1, x, self.n1, self.m)
    }

    pub fn f2(&self, x: f64) -> Result<ComplexMatrix> {
        self.checked("f2", &self.f2, x, self.m, self.n2)
    }

    pub fn g2(&self, x: f64) -> Result<ComplexMatrix> {
        self.checked("g2", &self.g2, x, self.n2, self.m)
    }

    /// `K(x, x')`, with `K(x, x) = f1(x) g1(x)`.
    pub fn eval_k(&self, x: f64, xp: f64) -> Result<ComplexMatrix> {
        if xp <= x {
            Ok(&self.f1(x)? * &self.g1(xp)?)
        } else {
            Ok(&self.f2(x)? * &self.g2(xp)?)
        }
    }

    /// `H(x, x') = f1(x) g1(x') - f2(x) g2(x')`.
    pub fn eval_h(&self, x: f64, xp: f64) -> Result<ComplexMatrix> {
        Ok(&(&self.f1(x)? * &self.g1(xp)?) - &(&self.f2(x)? * &self.g2(xp)?))
    }

    /// `B(x) = [g1; -g2]`, n x m.
    pub fn eval_b(&self, x: f64) -> Result<ComplexMatrix> {
        Ok(self.g1(x)?.vstack(&-&self.g2(x)?))
    }

    /// `C(x) = [f1, f2]`, m x n.
    pub fn eval_c(&self, x: f64) -> Result<ComplexMatrix> {
        Ok(self.f1(x)?.hstack(&self.f2(x)?))
    }

    /// `A(x) = [[g1 f1, g1 f2], [-g2 f1, -g2 f2]]`, assembled block by block.
    pub fn eval_a(&self, x: f64) -> Result<ComplexMatrix> {
        let (f1, g1, f2, g2) = (self.f1(x)?, self.g1(x)?, self.f2(x)?, self.g2(x)?);
        Ok(ComplexMatrix::from_blocks(
            &(&g1 * &f1),
            &(&g1 * &f2),
            &-&(&g2 * &f1),
            &-&(&g2 * &f2),
        ))
    }

    /// Evaluates all four factors at every grid node once.
    pub fn sample(&self, grid: &Grid) -> Result<KernelSamples> {
        let mut s = KernelSamples {
            grid: grid.clone(),
            m: self.m,
            n1: self.n1,
            n2: self.n2,
            f1: Vec::with_capacity(grid.len()),
            g1: Vec::with_capacity(grid.len()),
            f2: Vec::with_capacity(grid.len()),
            g2: Vec::with_capacity(grid.len()),
        };
        for &x in grid.nodes() {
            s.f1.push(self.f1(x)?);
            s.g1.push(self.g1(x)?);
            s.f2.push(self.f2(x)?);
            s.g2.push(self.g2(x)?);
        }
        Ok(s)
    }
}

/// Kernel factors cached on a grid.
#[derive(Clone, Debug)]
pub struct KernelSamples {
    pub grid: Grid,
    pub m: usize,
    pub n1: usize,
    pub n2: usize,
    pub f1: Vec<ComplexMatrix>,
    pub g1: Vec<ComplexMatrix>,
    pub f2: Vec<ComplexMatrix>,
    pub g2: Vec<ComplexMatrix>,
}

impl KernelSamples {
    pub fn len(&self) -> usize {
        self.f1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f1.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn b(&self, i: usize) -> ComplexMatrix {
        self.g1[i].vstack(&-&self.g2[i])
    }

    pub fn c(&self, i: usize) -> ComplexMatrix {
        self.f1[i].hstack(&self.f2[i])
    }

    /// K between nodes i and j with the lower-triangular diagonal convention.
    pub fn k(&self, i: usize, j: usize) -> ComplexMatrix {
        if j <= i {
            &self.f1[i] * &self.g1[j]
        } else {
            &self.f2[i] * &self.g2[j]
        }
    }

    pub fn h(&self, i: usize, j: usize) -> ComplexMatrix {
        &(&self.f1[i] * &self.g1[j]) - &(&self.f2[i] * &self.g2[j])
    }

    /// `tr(g1 f1) - tr(g2 f2)` at node i, which is `tr A`.
    pub fn trace_a(&self, i: usize) -> Complex64 {
        (&self.g1[i] * &self.f1[i]).trace() - (&self.g2[i] * &self.f2[i]).trace()
    }

    /// `tr(f1 g1)` at node i.
    pub fn trace_f1g1(&self, i: usize) -> Complex64 {
        (&self.f1[i] * &self.g1[i]).trace()
    }

    /// `tr(f2 g2)` at node i.
    pub fn trace_f2g2(&self, i: usize) -> Complex64 {
        (&self.f2[i] * &self.g2[i]).trace()
    }

    /// Discrete L2 norms of f1, g1, f2, g2 (Frobenius in the matrix index).
    pub fn l2_norms(&self) -> [f64; 4] {
        let w = self.grid.weights();
        let norm = |v: &[ComplexMatrix]| -> f64 {
            v.iter()
                .zip(w)
                .map(|(m, &wi)| wi * m.frobenius_norm().powi(2))
                .sum::<f64>()
                .sqrt()
        };
        [norm(&self.f1), norm(&self.g1), norm(&self.f2), norm(&self.g2)]
    }
}
