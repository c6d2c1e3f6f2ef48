//! Dense quadrature (Nystrom) discretization of a kernel, used as an
//! independent determinant oracle. Nothing here uses the semi-separable
//! structure beyond evaluating `K` at node pairs.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::lu::partial_pivoting::factor::{lu_in_place, lu_in_place_scratch};
use faer::{Mat, Par};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::SemiSeparableKernel;
use crate::matrix::ComplexMatrix;

/// Largest admissible `nodes * m`.
pub const MAX_DIMENSION: usize = 6000;

/// How the diagonal blocks `K(x_i, x_i)` are formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DiagonalRule {
    /// `f1 g1`, the lower-triangular limit.
    #[default]
    Lower,
    /// `(f1 g1 + f2 g2) / 2`, the mean of both one-sided limits. Restores
    /// second-order behaviour for kernels that jump across the diagonal.
    Average,
}

pub struct DenseDiscretization {
    matrix: Mat<Complex64>,
    grid: Grid,
    m: usize,
}

impl std::fmt::Debug for DenseDiscretization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DenseDiscretization")
            .field("dim", &self.dim())
            .field("m", &self.m)
            .field("nodes", &self.grid.len())
            .finish()
    }
}

pub fn discretize(kern: &SemiSeparableKernel, grid: &Grid) -> Result<DenseDiscretization> {
    discretize_with(kern, grid, DiagonalRule::Lower)
}

/// Block `(i, j)` is `w_i^{1/2} K(x_i, x_j) w_j^{1/2}`.
pub fn discretize_with(kern: &SemiSeparableKernel, grid: &Grid, rule: DiagonalRule) -> Result<DenseDiscretization> {
    let m = kern.m();
    let dim = grid.len() * m;
    if dim > MAX_DIMENSION {
        return Err(Error::SizeLimit(dim, MAX_DIMENSION));
    }
    let s = kern.sample(grid)?;
    let sw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let n = grid.len();

    let rows: Vec<Vec<ComplexMatrix>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let k = if i == j {
                        match rule {
                            DiagonalRule::Lower => &s.f1[i] * &s.g1[i],
                            DiagonalRule::Average => {
                                let mut a = &s.f1[i] * &s.g1[i];
                                a.axpy(Complex64::new(1.0, 0.0), &(&s.f2[i] * &s.g2[i]));
                                a.scale(Complex64::new(0.5, 0.0))
                            }
                        }
                    } else {
                        s.k(i, j)
                    };
                    k.scale(Complex64::new(sw[i] * sw[j], 0.0))
                })
                .collect()
        })
        .collect();

    let matrix = Mat::from_fn(dim, dim, |r, c| rows[r / m][c / m][(r % m, c % m)]);
    if matrix.col_iter().any(|col| col.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
        return Err(Error::NonFinite("Nystrom discretization"));
    }
    Ok(DenseDiscretization {
        matrix,
        grid: grid.clone(),
        m,
    })
}

impl DenseDiscretization {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.matrix[(r, c)]
    }

    pub fn matrix(&self) -> &Mat<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    /// Singular values in non-increasing order.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        self.matrix
            .singular_values()
            .map_err(|_| Error::Singular("SVD of the discretization did not converge"))
    }
}

/// `det(I - alpha M)` by LU with partial pivoting.
pub fn oracle_det(disc: &DenseDiscretization, alpha: Complex64) -> Complex64 {
    let n = disc.dim();
    let mut a = Mat::from_fn(n, n, |r, c| {
        let v = -alpha * disc.matrix[(r, c)];
        if r == c {
            v + 1.0
        } else {
            v
        }
    });
    dense_det(&mut a)
}

/// `det(I - alpha M) exp(alpha tr M)`.
pub fn oracle_det2(disc: &DenseDiscretization, alpha: Complex64) -> Complex64 {
    oracle_det(disc, alpha) * (alpha * disc.trace()).exp()
}

/// Determinant of a large dense matrix, factorized in place.
fn dense_det(a: &mut Mat<Complex64>) -> Complex64 {
    let n = a.nrows();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let par = Par::rayon(0);
    let mut perm = vec![0usize; n];
    let mut perm_inv = vec![0usize; n];
    let mut mem = MemBuffer::new(lu_in_place_scratch::<usize, Complex64>(n, n, par, Default::default()));
    let (info, _) = lu_in_place(
        a.as_mut(),
        &mut perm,
        &mut perm_inv,
        par,
        MemStack::new(&mut mem),
        Default::default(),
    );
    let mut det = Complex64::new(1.0, 0.0);
    for i in 0..n {
        det *= a[(i, i)];
    }
    if info.transposition_count % 2 == 1 {
        -det
    } else {
        det
    }
}
