//! Fredholm and 2-modified Fredholm determinants from `U(a*)` and `U(b*)`.

use log::warn;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::{KernelSamples, SemiSeparableKernel};
use crate::matrix::{ComplexMatrix, Lu};
use crate::volterra::{fundamental_solution_sampled, FundamentalSolution};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Agreement between determinant routes.
    pub route: f64,
    /// Exact identities (triviality, endpoint blocks, ...).
    pub invariant: f64,
    /// Agreement with the dense quadrature oracle.
    pub oracle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            route: 1e-7,
            invariant: 1e-9,
            oracle: 1e-4,
        }
    }
}

/// `P0 = diag(0, I_{n2})`.
pub fn p0(n1: usize, n2: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(n1 + n2, n1 + n2);
    for i in n1..n1 + n2 {
        p[(i, i)] = Complex64::new(1.0, 0.0);
    }
    p
}

/// The two trace integrals `\int tr(f1 g1)` and `\int tr(f2 g2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceReport {
    pub trace_f1g1: Complex64,
    pub trace_f2g2: Complex64,
}

impl TraceReport {
    pub fn difference(&self) -> f64 {
        (self.trace_f1g1 - self.trace_f2g2).norm()
    }
}

pub fn trace_k(kern: &SemiSeparableKernel, grid: &Grid) -> Result<TraceReport> {
    let s = kern.sample(grid)?;
    let rep = trace_sampled(&s);
    let scale = rep.trace_f1g1.norm().max(1.0);
    if rep.difference() > 1e-7 * scale {
        warn!(
            "tr(f1 g1) and tr(f2 g2) integrals differ by {:.3e}; K may not be trace class",
            rep.difference()
        );
    }
    Ok(rep)
}

pub fn trace_sampled(s: &KernelSamples) -> TraceReport {
    let t1: Vec<Complex64> = (0..s.len()).map(|i| s.trace_f1g1(i)).collect();
    let t2: Vec<Complex64> = (0..s.len()).map(|i| s.trace_f2g2(i)).collect();
    TraceReport {
        trace_f1g1: s.grid.integrate(&t1),
        trace_f2g2: s.grid.integrate(&t2),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Det,
    Det2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeterminantReport {
    pub alpha: Complex64,
    /// `det U(a*)`.
    pub det_a: Complex64,
    /// `det U(b*)`.
    pub det_b: Complex64,
    /// `det U(a*) exp(alpha \int tr f1 g1)`.
    pub det2_a: Complex64,
    /// `det U(b*) exp(alpha \int tr f2 g2)`.
    pub det2_b: Complex64,
    pub trace: TraceReport,
    pub exp_factor_1: Complex64,
    pub exp_factor_2: Complex64,
    /// `|det_a - det_b| / max(1, |det_a|)`.
    pub det_discrepancy: f64,
    /// `|det2_a - det2_b| / max(1, |det2_a|)`.
    pub det2_discrepancy: f64,
    /// Discrepancy of the quantity this report was requested for.
    pub route_discrepancy: f64,
    pub quantity: Quantity,
    pub flagged: bool,
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(1.0)
}

impl DeterminantReport {
    pub fn from_parts(fs: &FundamentalSolution, s: &KernelSamples, quantity: Quantity, tol: &Tolerances) -> Self {
        let trace = trace_sampled(s);
        let alpha = fs.alpha;
        let det_a = fs.det_a();
        let det_b = fs.det_b();
        let exp_factor_1 = (alpha * trace.trace_f1g1).exp();
        let exp_factor_2 = (alpha * trace.trace_f2g2).exp();
        let det2_a = det_a * exp_factor_1;
        let det2_b = det_b * exp_factor_2;
        let det_discrepancy = rel(det_a, det_b);
        let det2_discrepancy = rel(det2_a, det2_b);
        let route_discrepancy = match quantity {
            Quantity::Det => det_discrepancy,
            Quantity::Det2 => det2_discrepancy,
        };
        let flagged = !(route_discrepancy <= tol.route);
        if flagged {
            warn!("determinant routes disagree: {:?} discrepancy {:.3e}", quantity, route_discrepancy);
        }
        Self {
            alpha,
            det_a,
            det_b,
            det2_a,
            det2_b,
            trace,
            exp_factor_1,
            exp_factor_2,
            det_discrepancy,
            det2_discrepancy,
            route_discrepancy,
            quantity,
            flagged,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.det_b
    }

    pub fn det2(&self) -> Complex64 {
        self.det2_b
    }
}

/// `det(I - alpha K)` by both endpoint routes.
pub fn fredholm_det(kern: &SemiSeparableKernel, alpha: Complex64, grid: &Grid) -> Result<DeterminantReport> {
    fredholm_det_with(kern, alpha, grid, &Tolerances::default())
}

pub fn fredholm_det_with(
    kern: &SemiSeparableKernel,
    alpha: Complex64,
    grid: &Grid,
    tol: &Tolerances,
) -> Result<DeterminantReport> {
    let s = kern.sample(grid)?;
    let fs = fundamental_solution_sampled(&s, alpha)?;
    Ok(DeterminantReport::from_parts(&fs, &s, Quantity::Det, tol))
}

/// `det_2(I - alpha K)` by both endpoint routes.
pub fn fredholm_det2(kern: &SemiSeparableKernel, alpha: Complex64, grid: &Grid) -> Result<DeterminantReport> {
    fredholm_det2_with(kern, alpha, grid, &Tolerances::default())
}

pub fn fredholm_det2_with(
    kern: &SemiSeparableKernel,
    alpha: Complex64,
    grid: &Grid,
    tol: &Tolerances,
) -> Result<DeterminantReport> {
    let s = kern.sample(grid)?;
    let fs = fundamental_solution_sampled(&s, alpha)?;
    Ok(DeterminantReport::from_parts(&fs, &s, Quantity::Det2, tol))
}

/// Below this modulus `det(I - alpha K)` counts as zero for the resolvent.
pub const POLE_THRESHOLD: f64 = 1e-12;

/// Resolvent kernel `L(x, x', alpha)` with `(I - alpha K)^{-1} = I + alpha L`:
///
/// ```text
/// L =  C(x) U(x) (I - P0) U(x')^{-1} B(x')   x' < x
/// L = -C(x) U(x) P0 U(x')^{-1} B(x')         x  < x'
/// ```
///
/// `U` is interpolated linearly between grid nodes.
pub fn resolvent_kernel(kern: &SemiSeparableKernel, fs: &FundamentalSolution, x: f64, xp: f64) -> Result<ComplexMatrix> {
    let d = fs.det_b();
    if d.norm() < POLE_THRESHOLD {
        return Err(Error::Pole(d.norm()));
    }
    let ux = fs.at(x);
    let uxp = fs.at(xp);
    let right = Lu::new(&uxp)
        .map_err(|_| Error::Singular("U(x') in the resolvent kernel"))?
        .solve(&kern.eval_b(xp)?)?;
    let cu = &kern.eval_c(x)? * &ux;
    let p = p0(fs.n1, fs.n2);
    if xp < x {
        let q = &ComplexMatrix::identity(fs.n()) - &p;
        Ok(&(&cu * &q) * &right)
    } else {
        Ok(-&(&(&cu * &p) * &right))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Interval;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rank_one() -> SemiSeparableKernel {
        SemiSeparableKernel::scalar(|_| c(1.0, 0.0), |_| c(1.0, 0.0), |_| c(1.0, 0.0), |_| c(1.0, 0.0), Interval::finite(0.0, 1.0).unwrap())
            .unwrap()
    }

    #[test]
    fn rank_one_determinant() {
        let g = Grid::trapezoid(0.0, 1.0, 33).unwrap();
        for alpha in [c(0.3, 0.0), c(-1.2, 0.5), c(0.0, 0.0)] {
            let r = fredholm_det(&rank_one(), alpha, &g).unwrap();
            assert!((r.det_a - (1.0 - alpha)).norm() < 1e-13);
            assert!((r.det_b - (1.0 - alpha)).norm() < 1e-13);
            assert!(!r.flagged);
        }
    }

    #[test]
    fn rank_one_resolvent() {
        let g = Grid::trapezoid(0.0, 1.0, 33).unwrap();
        let alpha = c(0.4, 0.1);
        let k = rank_one();
        let fs = fundamental_solution_sampled(&k.sample(&g).unwrap(), alpha).unwrap();
        for (x, xp) in [(0.2, 0.7), (0.9, 0.1), (0.5, 0.5)] {
            let l = resolvent_kernel(&k, &fs, x, xp).unwrap()[(0, 0)];
            assert!((l - 1.0 / (1.0 - alpha)).norm() < 1e-12, "{l}");
        }
    }

    #[test]
    fn pole_is_reported() {
        let g = Grid::trapezoid(0.0, 1.0, 9).unwrap();
        let k = rank_one();
        let fs = fundamental_solution_sampled(&k.sample(&g).unwrap(), c(1.0, 0.0)).unwrap();
        assert!(matches!(resolvent_kernel(&k, &fs, 0.3, 0.6), Err(Error::Pole(_))));
    }

    #[test]
    fn trace_of_rank_one() {
        let g = Grid::trapezoid(0.0, 1.0, 5).unwrap();
        let t = trace_k(&rank_one(), &g).unwrap();
        assert!((t.trace_f1g1 - 1.0).norm() < 1e-15);
        assert!(t.difference() < 1e-15);
    }
}
