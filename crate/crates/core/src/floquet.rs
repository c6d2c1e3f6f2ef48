//! Periodic Schrodinger operators: the Floquet discriminant as a Fredholm
//! determinant on one period.

use std::fmt;
use std::sync::Arc;

use log::warn;
use num_complex::Complex64;

use crate::determinants::{fredholm_det_with, DeterminantReport, Tolerances};
use crate::error::{Error, Result};
use crate::grid::{Grid, Interval};
use crate::kernel::SemiSeparableKernel;
use crate::matrix::ComplexMatrix;
use crate::ode::transfer_matrix;
use crate::schrodinger::{free_green_sweep, ScalarFn, SpectralPoint};
use crate::volterra::{check_resolution, Direction};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Smallest admissible `|cos(k omega) - cos(theta)|`.
pub const COLLISION_GUARD: f64 = 1e-8;

/// A potential with period `omega`, described on `[0, omega]`.
#[derive(Clone)]
pub struct PeriodicPotential {
    v: ScalarFn,
    period: f64,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for PeriodicPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicPotential")
            .field("period", &self.period)
            .field("breakpoints", &self.breakpoints)
            .finish_non_exhaustive()
    }
}

impl PeriodicPotential {
    pub fn new(v: impl Fn(f64) -> Complex64 + Send + Sync + 'static, period: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidParameter(format!("period must be positive, got {period}")));
        }
        Ok(Self {
            v: Arc::new(v),
            period,
            breakpoints: Vec::new(),
        })
    }

    /// `V(x) = a + b cos(2 pi x / omega)`.
    pub fn cosine(a: Complex64, b: Complex64, period: f64) -> Result<Self> {
        let w = 2.0 * std::f64::consts::PI / period;
        Self::new(move |x| a + b * (w * x).cos(), period)
    }

    /// `V = depth` on `(0, width)` and zero on `(width, omega)`.
    pub fn kronig_penney(depth: Complex64, width: f64, period: f64) -> Result<Self> {
        if !(width > 0.0 && width < period) {
            return Err(Error::InvalidParameter(format!("well width {width} must lie in (0, {period})")));
        }
        Ok(Self::new(move |x| if x < width { depth } else { ZERO }, period)?.with_breakpoints(&[width]))
    }

    /// Adds interior jump locations in `(0, omega)`.
    pub fn with_breakpoints(mut self, bps: &[f64]) -> Self {
        for &b in bps {
            if b > 0.0 && b < self.period && !self.breakpoints.contains(&b) {
                self.breakpoints.push(b);
            }
        }
        self.breakpoints.sort_by(f64::total_cmp);
        self
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn value(&self, x: f64) -> Complex64 {
        (self.v)(x)
    }

    /// Value used on grids: averaged at interior breakpoints, one-sided at
    /// the ends of the period.
    pub fn sample(&self, x: f64) -> Complex64 {
        let d = 1e-9 * (1.0 + x.abs());
        if self.breakpoints.iter().any(|&b| (b - x).abs() <= 1e-12 * (1.0 + x.abs())) {
            0.5 * ((self.v)(x - d) + (self.v)(x + d))
        } else if x <= 0.0 && !self.breakpoints.is_empty() {
            (self.v)(x + d)
        } else if x >= self.period && !self.breakpoints.is_empty() {
            (self.v)(x - d)
        } else {
            (self.v)(x)
        }
    }

    fn u(&self, x: f64) -> Complex64 {
        let v = self.sample(x);
        let r = v.norm();
        if r == 0.0 {
            ZERO
        } else {
            v / r.sqrt()
        }
    }

    fn v(&self, x: f64) -> Complex64 {
        Complex64::new(self.sample(x).norm().sqrt(), 0.0)
    }

    /// Trapezoid grid with about `n` nodes on `[0, omega]`, breakpoints included.
    pub fn grid(&self, n: usize) -> Result<Grid> {
        Grid::trapezoid_with_breakpoints(0.0, self.period, n, &self.breakpoints)
    }
}

/// Spectral parameter and Floquet angle, with `E_+- = e^{+-i theta} e^{-ik omega}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloquetParams {
    pub zp: SpectralPoint,
    pub theta: f64,
    pub e_plus: Complex64,
    pub e_minus: Complex64,
    /// `cos(k omega) - cos(theta)`.
    pub gap: Complex64,
}

impl FloquetParams {
    pub fn new(zp: SpectralPoint, theta: f64, period: f64) -> Result<Self> {
        let k = zp.sqrt_z();
        let gap = (k * period).cos() - theta.cos();
        if gap.norm() <= COLLISION_GUARD {
            return Err(Error::SpectralCollision(gap.norm()));
        }
        let e = (-I * k * period).exp();
        Ok(Self {
            zp,
            theta,
            e_plus: Complex64::from_polar(1.0, theta) * e,
            e_minus: Complex64::from_polar(1.0, -theta) * e,
            gap,
        })
    }
}

/// Monodromy matrix over one period, from RK4 on the first-order system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Monodromy {
    /// `[[c, s], [c', s']]` at `x = omega`.
    pub matrix: [[Complex64; 2]; 2],
    /// `(c(omega) + s'(omega)) / 2`.
    pub discriminant: Complex64,
    /// `det`, which equals 1 for the exact flow.
    pub det: Complex64,
}

pub fn monodromy(pot: &PeriodicPotential, z: Complex64, step: f64) -> Monodromy {
    let v = |x: f64| pot.value(x);
    let m = transfer_matrix(&v, z, 0.0, pot.period, step, &pot.breakpoints);
    Monodromy {
        matrix: m,
        discriminant: 0.5 * (m[0][0] + m[1][1]),
        det: m[0][0] * m[1][1] - m[0][1] * m[1][0],
    }
}

/// The kernel `K_theta(z)` on `[0, omega]` with `m = 1`, `n1 = n2 = 2`.
///
/// ```text
/// f1 = f2 = -u (e^{ikx}, e^{-ikx})
/// g1 = c v (E+ e^{-ikx} / (E+ - 1), e^{ikx} / (E- - 1))^T
/// g2 = c v (e^{-ikx} / (E+ - 1), E- e^{ikx} / (E- - 1))^T,    c = i / 2k
/// ```
pub fn build_ktheta_kernel(pot: &PeriodicPotential, fp: &FloquetParams) -> Result<SemiSeparableKernel> {
    let k = fp.zp.sqrt_z();
    let c = I / (2.0 * k);
    let (ep, em) = (fp.e_plus, fp.e_minus);
    let (ap, am) = (1.0 / (ep - 1.0), 1.0 / (em - 1.0));
    let (p1, p2, p3, p4) = (pot.clone(), pot.clone(), pot.clone(), pot.clone());
    let f = move |p: &PeriodicPotential, x: f64| {
        let u = -p.u(x);
        let e = (I * k * x).exp();
        ComplexMatrix::row_vector(&[u * e, u / e])
    };
    SemiSeparableKernel::new(
        1,
        2,
        2,
        move |x| f(&p1, x),
        move |x| {
            let e = (I * k * x).exp();
            let w = c * p2.v(x);
            ComplexMatrix::column_vector(&[w * ep * ap / e, w * am * e])
        },
        move |x| f(&p3, x),
        move |x| {
            let e = (I * k * x).exp();
            let w = c * p4.v(x);
            ComplexMatrix::column_vector(&[w * ap / e, w * em * am * e])
        },
        Interval::finite(0.0, pot.period)?,
    )
}

/// `phi_+-` solve the forward and `psi_+-` the backward integral equations
/// with free data `e^{+-ikx}` on one period.
#[derive(Clone, Debug)]
pub struct FloquetSolutions {
    pub grid: Grid,
    pub phi_plus: Vec<Complex64>,
    pub phi_minus: Vec<Complex64>,
    pub psi_plus: Vec<Complex64>,
    pub psi_minus: Vec<Complex64>,
}

pub fn floquet_solutions(pot: &PeriodicPotential, zp: &SpectralPoint, grid: &Grid) -> Result<FloquetSolutions> {
    let k = zp.sqrt_z();
    check_resolution(grid, k);
    let vs: Vec<Complex64> = grid.nodes().iter().map(|&x| pot.sample(x)).collect();
    let y0: Vec<Vec<Complex64>> = grid
        .nodes()
        .iter()
        .map(|&x| {
            let e = (I * k * x).exp();
            vec![e, 1.0 / e]
        })
        .collect();
    let dy0: Vec<Vec<Complex64>> = y0.iter().map(|r| vec![I * k * r[0], -I * k * r[1]]).collect();
    let (fwd, _) = free_green_sweep(grid, &vs, k, &y0, &dy0, 1.0, Direction::Forward)?;
    let (bwd, _) = free_green_sweep(grid, &vs, k, &y0, &dy0, -1.0, Direction::Backward)?;
    Ok(FloquetSolutions {
        grid: grid.clone(),
        phi_plus: fwd.iter().map(|r| r[0]).collect(),
        phi_minus: fwd.iter().map(|r| r[1]).collect(),
        psi_plus: bwd.iter().map(|r| r[0]).collect(),
        psi_minus: bwd.iter().map(|r| r[1]).collect(),
    })
}

#[derive(Clone, Debug)]
pub struct FloquetReport {
    pub params: FloquetParams,
    /// `det(I - K_theta)` from both endpoints of the fundamental solution.
    pub det: DeterminantReport,
    /// The same determinant from the backward solutions `psi_+-`.
    pub via_psi: Complex64,
    /// The same determinant from the forward solutions `phi_+-`.
    pub via_phi: Complex64,
    /// `Delta(z)` recovered from the determinant.
    pub discriminant: Complex64,
    /// `Delta(z)` from the RK4 monodromy matrix.
    pub monodromy: Monodromy,
    /// Largest relative difference among the four determinant routes.
    pub spread: f64,
    /// Relative difference of the two discriminants.
    pub discriminant_mismatch: f64,
    pub flagged: bool,
}

/// `det(I - K_theta(z))` by four routes, plus the discriminant check
/// `Delta(z) = cos(theta) + det (cos(k omega) - cos(theta))`.
pub fn det_ktheta(pot: &PeriodicPotential, zp: &SpectralPoint, theta: f64, grid: &Grid) -> Result<FloquetReport> {
    det_ktheta_with(pot, zp, theta, grid, &Tolerances::default(), None)
}

/// As [`det_ktheta`]; `rk4_step` defaults to a tenth of the grid spacing.
pub fn det_ktheta_with(
    pot: &PeriodicPotential,
    zp: &SpectralPoint,
    theta: f64,
    grid: &Grid,
    tol: &Tolerances,
    rk4_step: Option<f64>,
) -> Result<FloquetReport> {
    let fp = FloquetParams::new(*zp, theta, pot.period)?;
    let k = zp.sqrt_z();
    let z = zp.z();
    let det = fredholm_det_with(&build_ktheta_kernel(pot, &fp)?, ONE, grid, tol)?;

    let sol = floquet_solutions(pot, zp, grid)?;
    let vs: Vec<Complex64> = grid.nodes().iter().map(|&x| pot.sample(x)).collect();
    let moment = |sign: f64, y: &[Complex64]| -> Complex64 {
        let vals: Vec<Complex64> = grid
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, &x)| (sign * I * k * x).exp() * vs[i] * y[i])
            .collect();
        grid.integrate(&vals)
    };
    let c = I / (2.0 * k);
    let (ep, em) = (fp.e_plus, fp.e_minus);
    let cross = 1.0 / (4.0 * z * (ep - 1.0) * (em - 1.0));
    let via_psi = (1.0 + c * ep / (ep - 1.0) * moment(-1.0, &sol.psi_plus))
        * (1.0 + c / (em - 1.0) * moment(1.0, &sol.psi_minus))
        + cross * ep * moment(1.0, &sol.psi_plus) * moment(-1.0, &sol.psi_minus);
    let via_phi = (1.0 + c / (ep - 1.0) * moment(-1.0, &sol.phi_plus))
        * (1.0 + c * em / (em - 1.0) * moment(1.0, &sol.phi_minus))
        + cross * em * moment(1.0, &sol.phi_plus) * moment(-1.0, &sol.phi_minus);

    let discriminant = theta.cos() + det.det_b * fp.gap;
    let step = rk4_step.unwrap_or(grid.max_step() / 10.0);
    let mono = monodromy(pot, z, step);
    let routes = [det.det_a, det.det_b, via_psi, via_phi];
    let mut spread: f64 = 0.0;
    for a in &routes {
        for b in &routes {
            spread = spread.max((a - b).norm() / a.norm().max(1.0));
        }
    }
    let discriminant_mismatch = (discriminant - mono.discriminant).norm() / mono.discriminant.norm().max(1.0);
    let flagged = !(spread <= tol.route) || !(discriminant_mismatch <= tol.oracle);
    if flagged {
        warn!(
            "Floquet routes disagree at z = {}, theta = {}: spread {:.3e}, discriminant {:.3e}",
            z, theta, spread, discriminant_mismatch
        );
    }
    Ok(FloquetReport {
        params: fp,
        det,
        via_psi,
        via_phi,
        discriminant,
        monodromy: mono,
        spread,
        discriminant_mismatch,
        flagged,
    })
}
