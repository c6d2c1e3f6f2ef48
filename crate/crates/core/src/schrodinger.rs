//! Schrodinger operators on the half-line and on the line: Jost and regular
//! solutions, Jost functions, and the matching semi-separable kernels.

use std::fmt;
use std::sync::Arc;

use log::warn;
use num_complex::Complex64;

use crate::determinants::{fredholm_det2_with, fredholm_det_with, DeterminantReport, Tolerances};
use crate::error::{Error, Result};
use crate::grid::{Grid, Interval};
use crate::kernel::SemiSeparableKernel;
use crate::matrix::ComplexMatrix;
use crate::volterra::{check_step, sweep, Direction};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Default lower bound on `|z|`.
pub const Z_MIN: f64 = 1e-6;

/// Default distance above the real axis used for energies on the spectrum.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// A spectral parameter with its square root on the branch `Im sqrt(z) >= 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralPoint {
    z: Complex64,
    sqrt_z: Complex64,
}

impl SpectralPoint {
    pub fn new(z: Complex64) -> Result<Self> {
        Self::with_min(z, Z_MIN)
    }

    pub fn with_min(z: Complex64, z_min: f64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidParameter(format!("spectral parameter {z} is not finite")));
        }
        if z.norm() < z_min {
            return Err(Error::SpectralPointTooSmall(z, z_min));
        }
        let mut k = z.sqrt();
        if k.im < 0.0 || (k.im == 0.0 && k.re < 0.0) {
            k = -k;
        }
        Ok(Self { z, sqrt_z: k })
    }

    /// `z = lambda + i epsilon`, approaching the real axis from above.
    pub fn above_real_axis(lambda: f64, epsilon: f64) -> Result<Self> {
        Self::new(Complex64::new(lambda, epsilon))
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn sqrt_z(&self) -> Complex64 {
        self.sqrt_z
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    HalfLine,
    Line,
}

pub type ScalarFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// A complex potential vanishing outside `[support_lo, support_hi]`.
///
/// Values at declared breakpoints are replaced by the mean of the one-sided
/// limits when sampled, which keeps the trapezoid rule second order across
/// jumps as long as the grid contains the breakpoints.
#[derive(Clone)]
pub struct Potential {
    v: ScalarFn,
    side: Side,
    support_lo: f64,
    support_hi: f64,
    breakpoints: Vec<f64>,
    margin: f64,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("side", &self.side)
            .field("support", &(self.support_lo, self.support_hi))
            .field("breakpoints", &self.breakpoints)
            .finish_non_exhaustive()
    }
}

impl Potential {
    /// Half-line potential supported in `[0, r]`.
    pub fn half_line(v: impl Fn(f64) -> Complex64 + Send + Sync + 'static, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("support bound must be positive, got {r}")));
        }
        Ok(Self {
            v: Arc::new(v),
            side: Side::HalfLine,
            support_lo: 0.0,
            support_hi: r,
            breakpoints: vec![r],
            margin: 1.0,
        })
    }

    /// Line potential supported in `[lo, hi]`.
    pub fn line(v: impl Fn(f64) -> Complex64 + Send + Sync + 'static, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!("bad support [{lo}, {hi}]")));
        }
        Ok(Self {
            v: Arc::new(v),
            side: Side::Line,
            support_lo: lo,
            support_hi: hi,
            breakpoints: vec![lo, hi],
            margin: 1.0,
        })
    }

    /// `V = depth` on `(a, b)`, zero elsewhere.
    pub fn square_well(side: Side, depth: Complex64, a: f64, b: f64) -> Result<Self> {
        if !(a < b) || (side == Side::HalfLine && a < 0.0) {
            return Err(Error::InvalidParameter(format!("bad well ({a}, {b})")));
        }
        let f = move |x: f64| if x > a && x < b { depth } else { ZERO };
        let p = match side {
            Side::HalfLine => Self::half_line(f, b)?,
            Side::Line => Self::line(f, a, b)?,
        };
        Ok(p.with_breakpoints(&[a, b]))
    }

    /// Potential given by samples `(x_k, V_k)`, linearly interpolated and
    /// zero outside the table.
    pub fn tabulated(side: Side, xs: Vec<f64>, vs: Vec<Complex64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != vs.len() {
            return Err(Error::InvalidParameter("need at least two (x, V) samples of equal count".into()));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) || xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("tabulated abscissae must be finite and increasing".into()));
        }
        if side == Side::HalfLine && xs[0] < 0.0 {
            return Err(Error::InvalidParameter("half-line table starts below 0".into()));
        }
        let (lo, hi) = (xs[0], xs[xs.len() - 1]);
        let table = Arc::new((xs, vs));
        let t = Arc::clone(&table);
        let f = move |x: f64| {
            let (xs, vs) = (&t.0, &t.1);
            if x < xs[0] || x > xs[xs.len() - 1] {
                return ZERO;
            }
            let j = xs.partition_point(|&p| p <= x).clamp(1, xs.len() - 1);
            let s = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
            vs[j - 1] * (1.0 - s) + vs[j] * s
        };
        let p = match side {
            Side::HalfLine => Self::half_line(f, hi)?,
            Side::Line => Self::line(f, lo, hi)?,
        };
        Ok(p.with_breakpoints(&[lo, hi]))
    }

    /// A potential with an integrable tail, cut off at the first `R` (scanned
    /// on a unit lattice up to `r_max`) where the tail integral of `|V|` drops
    /// below `tail_tol`.
    pub fn with_tail_cutoff(
        side: Side,
        v: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        tail_tol: f64,
        r_max: f64,
    ) -> Result<Self> {
        let v: ScalarFn = Arc::new(v);
        let tail = |r: f64| -> f64 {
            // \int_r^{r_max + 50} |V|, both sides for the line
            let end = r_max + 50.0;
            let n = (((end - r) * 200.0).ceil() as usize).max(2);
            let g = Grid::trapezoid(r, end, n + 1).expect("valid tail grid");
            let right: Vec<f64> = g.nodes().iter().map(|&x| v(x).norm()).collect();
            let mut t = g.integrate(&right);
            if side == Side::Line {
                let left: Vec<f64> = g.nodes().iter().map(|&x| v(-x).norm()).collect();
                t += g.integrate(&left);
            }
            t
        };
        let mut r = 1.0;
        while tail(r) >= tail_tol {
            r += 1.0;
            if r > r_max {
                return Err(Error::InvalidParameter(format!(
                    "tail of |V| does not drop below {tail_tol:e} before R = {r_max}"
                )));
            }
        }
        let vc = Arc::clone(&v);
        match side {
            Side::HalfLine => Self::half_line(move |x| if x <= r { vc(x) } else { ZERO }, r),
            Side::Line => Self::line(move |x| if x.abs() <= r { vc(x) } else { ZERO }, -r, r),
        }
    }

    /// Adds jump locations. Half-line breakpoints at or below 0 are ignored.
    pub fn with_breakpoints(mut self, bps: &[f64]) -> Self {
        for &b in bps {
            if self.side == Side::HalfLine && b <= 0.0 {
                continue;
            }
            if !self.breakpoints.contains(&b) {
                self.breakpoints.push(b);
            }
        }
        self.breakpoints.sort_by(f64::total_cmp);
        self
    }

    /// Width of the zero-potential margin added on each open side of the
    /// support to form the computational window (default 1).
    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin.max(0.0);
        self
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn support(&self) -> (f64, f64) {
        (self.support_lo, self.support_hi)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// `V(x)`, zero outside the support.
    pub fn value(&self, x: f64) -> Complex64 {
        if x < self.support_lo || x > self.support_hi {
            ZERO
        } else {
            (self.v)(x)
        }
    }

    /// The potential as used on grids: mean of one-sided limits at breakpoints,
    /// right limit at the origin of the half-line.
    pub fn sample(&self, x: f64) -> Complex64 {
        if self.side == Side::HalfLine && x <= 0.0 {
            return (self.v)(1e-9);
        }
        let tol = 1e-12 * (1.0 + x.abs());
        if self.breakpoints.iter().any(|&b| (b - x).abs() <= tol) {
            let d = 1e-9 * (1.0 + x.abs());
            0.5 * (self.value(x - d) + self.value(x + d))
        } else {
            self.value(x)
        }
    }

    /// `u = |V|^{1/2} exp(i arg V)`.
    pub fn u(&self, x: f64) -> Complex64 {
        let v = self.sample(x);
        let r = v.norm();
        if r == 0.0 {
            ZERO
        } else {
            v / r.sqrt()
        }
    }

    /// `v = |V|^{1/2}`.
    pub fn v(&self, x: f64) -> Complex64 {
        Complex64::new(self.sample(x).norm().sqrt(), 0.0)
    }

    /// The computational window: the support widened by the margin on each
    /// side that extends to infinity.
    pub fn window(&self) -> Interval {
        match self.side {
            Side::HalfLine => Interval::truncated(0.0, f64::INFINITY, 0.0, self.support_hi + self.margin),
            Side::Line => Interval::truncated(
                f64::NEG_INFINITY,
                f64::INFINITY,
                self.support_lo - self.margin,
                self.support_hi + self.margin,
            ),
        }
        .expect("support is a valid interval")
    }

    /// Trapezoid grid of `n` nodes on the window with every breakpoint as a
    /// node. Each zero-potential margin gets one step of the interior width
    /// next to the support, which keeps the half-weight of the edge node,
    /// followed by a single long panel: every integrand carries a factor of
    /// `V` and vanishes there.
    pub fn grid(&self, n: usize) -> Result<Grid> {
        let w = self.window();
        let (lo, hi) = (self.support_lo, self.support_hi);
        let left = w.lo() < lo;
        let right = w.hi() > hi;
        let inner = n.saturating_sub(2 * (left as usize + right as usize)).max(2);
        let core = Grid::trapezoid_with_breakpoints(lo, hi, inner, &self.breakpoints)?;
        let x = core.nodes();
        let mut nodes = Vec::with_capacity(n);
        if left {
            let h = x[1] - x[0];
            nodes.push(w.lo());
            if lo - h > w.lo() {
                nodes.push(lo - h);
            }
        }
        nodes.extend_from_slice(x);
        if right {
            let h = x[x.len() - 1] - x[x.len() - 2];
            if hi + h < w.hi() {
                nodes.push(hi + h);
            }
            nodes.push(w.hi());
        }
        Grid::from_nodes(nodes)
    }

    /// Largest grid step inside the support.
    pub fn support_step(&self, grid: &Grid) -> f64 {
        let x = grid.nodes();
        let tol = 1e-12 * (1.0 + self.support_lo.abs().max(self.support_hi.abs()));
        x.windows(2)
            .filter(|p| p[0] >= self.support_lo - tol && p[1] <= self.support_hi + tol)
            .map(|p| p[1] - p[0])
            .fold(0.0, f64::max)
    }

    pub fn l1_norm(&self, grid: &Grid) -> f64 {
        let vals: Vec<f64> = grid.nodes().iter().map(|&x| self.sample(x).norm()).collect();
        grid.integrate(&vals)
    }

    /// `\int V` on the grid.
    pub fn integral(&self, grid: &Grid) -> Complex64 {
        let vals: Vec<Complex64> = grid.nodes().iter().map(|&x| self.sample(x)).collect();
        grid.integrate(&vals)
    }

    /// Checks that every grid node outside the support carries `V = 0` and
    /// that the sampled L1 norm is finite.
    pub fn verify(&self, grid: &Grid) -> Result<()> {
        for &x in grid.nodes() {
            let v = self.sample(x);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite("potential"));
            }
            let outside = x < self.support_lo - 1e-12 || x > self.support_hi + 1e-12;
            if outside && v != ZERO {
                return Err(Error::InvalidParameter(format!(
                    "V({x}) = {v} is nonzero outside the declared support"
                )));
            }
        }
        Ok(())
    }
}

/// A solution sampled on a grid together with its derivative.
#[derive(Clone, Debug)]
pub struct SolutionSamples {
    pub grid: Grid,
    pub values: Vec<Complex64>,
    pub derivatives: Vec<Complex64>,
}

impl SolutionSamples {
    /// `W(f, g) = f g' - f' g` at node `i`.
    pub fn wronskian(&self, other: &Self, i: usize) -> Complex64 {
        self.values[i] * other.derivatives[i] - self.derivatives[i] * other.values[i]
    }
}

/// Solves `y(x) = y0(x) + sigma \int g0(x, x') V(x') y(x') dx'`, where
/// `g0(x, x') = sin(k (x - x')) / k` and the integral runs over `[x0, x]`
/// (forward) or `[x, x_last]` (backward). Several right-hand sides are
/// handled at once as the columns of `y0`. Derivatives come from
/// differentiating the representation, whose boundary term vanishes.
pub(crate) fn free_green_sweep(
    grid: &Grid,
    vs: &[Complex64],
    k: Complex64,
    y0: &[Vec<Complex64>],
    dy0: &[Vec<Complex64>],
    sigma: f64,
    dir: Direction,
) -> Result<(Vec<Vec<Complex64>>, Vec<Vec<Complex64>>)> {
    grid.require_trapezoid("the Volterra sweep")?;
    let nodes = grid.nodes();
    let cols = y0[0].len();
    let two_ik = 2.0 * I * k;
    let p: Vec<ComplexMatrix> = nodes
        .iter()
        .map(|&x| {
            let e = (I * k * x).exp();
            ComplexMatrix::row_vector(&[e / two_ik, -(1.0 / e) / two_ik])
        })
        .collect();
    let q: Vec<ComplexMatrix> = nodes
        .iter()
        .zip(vs)
        .map(|(&x, &v)| {
            let e = (I * k * x).exp();
            ComplexMatrix::column_vector(&[v / e, v * e])
        })
        .collect();
    let rhs: Vec<ComplexMatrix> = y0.iter().map(|r| ComplexMatrix::row_vector(r)).collect();
    let sw = sweep(nodes, &p, &q, &rhs, Complex64::new(sigma, 0.0), dir)?;
    let mut vals = Vec::with_capacity(nodes.len());
    let mut ders = Vec::with_capacity(nodes.len());
    for (i, &x) in nodes.iter().enumerate() {
        let e = (I * k * x).exp();
        let dp = ComplexMatrix::row_vector(&[0.5 * e, 0.5 / e]);
        let corr = &dp * &sw.integral[i];
        vals.push((0..cols).map(|c| sw.y[i][(0, c)]).collect());
        ders.push((0..cols).map(|c| dy0[i][c] + sigma * corr[(0, c)]).collect());
    }
    Ok((vals, ders))
}

fn sampled(pot: &Potential, grid: &Grid) -> Vec<Complex64> {
    grid.nodes().iter().map(|&x| pot.sample(x)).collect()
}

fn single(grid: &Grid, vals: Vec<Vec<Complex64>>, ders: Vec<Vec<Complex64>>) -> SolutionSamples {
    SolutionSamples {
        grid: grid.clone(),
        values: vals.into_iter().map(|v| v[0]).collect(),
        derivatives: ders.into_iter().map(|v| v[0]).collect(),
    }
}

/// Jost solution `f(z, .)` on the half-line grid:
/// `f(x) = e^{ikx} - \int_x^inf g0(x, x') V(x') f(x') dx'`.
pub fn jost_solution_halfline(pot: &Potential, zp: &SpectralPoint, grid: &Grid) -> Result<SolutionSamples> {
    let k = zp.sqrt_z();
    check_step(pot.support_step(grid), k);
    let y0: Vec<_> = grid.nodes().iter().map(|&x| vec![(I * k * x).exp()]).collect();
    let dy0: Vec<_> = grid.nodes().iter().map(|&x| vec![I * k * (I * k * x).exp()]).collect();
    let (v, d) = free_green_sweep(grid, &sampled(pot, grid), k, &y0, &dy0, -1.0, Direction::Backward)?;
    Ok(single(grid, v, d))
}

/// Regular solution `phi(z, .)`:
/// `phi(x) = sin(kx)/k + \int_0^x g0(x, x') V(x') phi(x') dx'`.
pub fn regular_solution_halfline(pot: &Potential, zp: &SpectralPoint, grid: &Grid) -> Result<SolutionSamples> {
    let k = zp.sqrt_z();
    check_step(pot.support_step(grid), k);
    let y0: Vec<_> = grid.nodes().iter().map(|&x| vec![(k * x).sin() / k]).collect();
    let dy0: Vec<_> = grid.nodes().iter().map(|&x| vec![(k * x).cos()]).collect();
    let (v, d) = free_green_sweep(grid, &sampled(pot, grid), k, &y0, &dy0, 1.0, Direction::Forward)?;
    Ok(single(grid, v, d))
}

/// Jost solutions `f_+` and `f_-` of the line problem.
pub fn jost_solutions_line(pot: &Potential, zp: &SpectralPoint, grid: &Grid) -> Result<(SolutionSamples, SolutionSamples)> {
    let k = zp.sqrt_z();
    check_step(pot.support_step(grid), k);
    let vs = sampled(pot, grid);
    let yp: Vec<_> = grid.nodes().iter().map(|&x| vec![(I * k * x).exp()]).collect();
    let dyp: Vec<_> = grid.nodes().iter().map(|&x| vec![I * k * (I * k * x).exp()]).collect();
    let (v, d) = free_green_sweep(grid, &vs, k, &yp, &dyp, -1.0, Direction::Backward)?;
    let plus = single(grid, v, d);
    let ym: Vec<_> = grid.nodes().iter().map(|&x| vec![(-I * k * x).exp()]).collect();
    let dym: Vec<_> = grid.nodes().iter().map(|&x| vec![-I * k * (-I * k * x).exp()]).collect();
    // -\int_x^{-inf} = +\int_{-inf}^x
    let (v, d) = free_green_sweep(grid, &vs, k, &ym, &dym, 1.0, Direction::Forward)?;
    let minus = single(grid, v, d);
    Ok((plus, minus))
}

/// Half-line kernel `K(z, x, x') = -u(x) G0_+(z, x, x') v(x')`:
/// `f1 = -u e^{ikx}`, `g1 = v sin(kx)/k`, `f2 = -u sin(kx)/k`, `g2 = v e^{ikx}`.
pub fn build_halfline_kernel(pot: &Potential, zp: &SpectralPoint) -> Result<SemiSeparableKernel> {
    if pot.side() != Side::HalfLine {
        return Err(Error::InvalidParameter("half-line kernel needs a half-line potential".into()));
    }
    let k = zp.sqrt_z();
    let (p1, p2, p3, p4) = (pot.clone(), pot.clone(), pot.clone(), pot.clone());
    SemiSeparableKernel::scalar(
        move |x| -p1.u(x) * (I * k * x).exp(),
        move |x| p2.v(x) * (k * x).sin() / k,
        move |x| -p3.u(x) * (k * x).sin() / k,
        move |x| p4.v(x) * (I * k * x).exp(),
        pot.window(),
    )
}

/// Line kernel `K(z, x, x') = -u(x) (i / 2k) e^{ik|x - x'|} v(x')`.
pub fn build_line_kernel(pot: &Potential, zp: &SpectralPoint) -> Result<SemiSeparableKernel> {
    if pot.side() != Side::Line {
        return Err(Error::InvalidParameter("line kernel needs a line potential".into()));
    }
    let k = zp.sqrt_z();
    let c = I / (2.0 * k);
    let (p1, p2, p3, p4) = (pot.clone(), pot.clone(), pot.clone(), pot.clone());
    SemiSeparableKernel::scalar(
        move |x| -p1.u(x) * (I * k * x).exp(),
        move |x| c * p2.v(x) * (-I * k * x).exp(),
        move |x| -p3.u(x) * (-I * k * x).exp(),
        move |x| c * p4.v(x) * (I * k * x).exp(),
        pot.window(),
    )
}

/// Kernel of the first-order system (`m = 2`, `n1 = n2 = 1`):
///
/// ```text
/// f1 = -u (1, ik)^T e^{ikx}     g1 = v (i/2k e^{-ikx}, 0)
/// f2 = -u (1, -ik)^T e^{-ikx}   g2 = v (i/2k e^{ikx}, 0)
/// ```
pub fn build_system_kernel(pot: &Potential, zp: &SpectralPoint) -> Result<SemiSeparableKernel> {
    if pot.side() != Side::Line {
        return Err(Error::InvalidParameter("system kernel needs a line potential".into()));
    }
    let k = zp.sqrt_z();
    let c = I / (2.0 * k);
    let (p1, p2, p3, p4) = (pot.clone(), pot.clone(), pot.clone(), pot.clone());
    SemiSeparableKernel::new(
        2,
        1,
        1,
        move |x| {
            let e = -p1.u(x) * (I * k * x).exp();
            ComplexMatrix::column_vector(&[e, I * k * e])
        },
        move |x| ComplexMatrix::row_vector(&[c * p2.v(x) * (-I * k * x).exp(), ZERO]),
        move |x| {
            let e = -p3.u(x) * (-I * k * x).exp();
            ComplexMatrix::column_vector(&[e, -I * k * e])
        },
        move |x| ComplexMatrix::row_vector(&[c * p4.v(x) * (I * k * x).exp(), ZERO]),
        pot.window(),
    )
}

fn spread(vals: &[Complex64]) -> f64 {
    let mut worst: f64 = 0.0;
    for a in vals {
        for b in vals {
            worst = worst.max((a - b).norm() / a.norm().max(1.0));
        }
    }
    worst
}

#[derive(Clone, Debug)]
pub struct JostReport {
    pub z: SpectralPoint,
    /// `f(z, 0)`.
    pub jost: Complex64,
    /// `1 + k^{-1} \int sin(kx) V f`.
    pub sine_representation: Complex64,
    /// `1 + \int e^{ikx} V phi`.
    pub regular_representation: Complex64,
    /// `W(f, phi)` at the left endpoint.
    pub wronskian: Complex64,
    /// `det(I - K(z))` by both routes.
    pub det: DeterminantReport,
    /// Largest relative difference among the Jost function routes.
    pub spread: f64,
    /// Largest relative difference between any Jost route and `det(I - K)`.
    pub det_mismatch: f64,
    pub flagged: bool,
}

/// Jost function of the half-line problem by every available route.
pub fn jost_function_halfline(pot: &Potential, zp: &SpectralPoint, grid: &Grid) -> Result<JostReport> {
    jost_function_halfline_with(pot, zp, grid, &Tolerances::default())
}

pub fn jost_function_halfline_with(
    pot: &Potential,
    zp: &SpectralPoint,
    grid: &Grid,
    tol: &Tolerances,
) -> Result<JostReport> {
    let k = zp.sqrt_z();
    let f = jost_solution_halfline(pot, zp, grid)?;
    let phi = regular_solution_halfline(pot, zp, grid)?;
    let vs = sampled(pot, grid);
    let nodes = grid.nodes();
    let sine: Vec<Complex64> = (0..nodes.len()).map(|i| (k * nodes[i]).sin() * vs[i] * f.values[i]).collect();
    let reg: Vec<Complex64> = (0..nodes.len()).map(|i| (I * k * nodes[i]).exp() * vs[i] * phi.values[i]).collect();
    let sine_representation = 1.0 + grid.integrate(&sine) / k;
    let regular_representation = 1.0 + grid.integrate(&reg);
    let jost = f.values[0];
    let wronskian = f.wronskian(&phi, 0);
    let det = fredholm_det_with(&build_halfline_kernel(pot, zp)?, ONE, grid, tol)?;

    let routes = [jost, sine_representation, regular_representation, wronskian];
    let s = spread(&routes);
    let det_mismatch = routes
        .iter()
        .flat_map(|r| [det.det_a, det.det_b].map(|d| (r - d).norm() / r.norm().max(1.0)))
        .fold(0.0, f64::max);
    let flagged = !(s <= tol.route) || !(det_mismatch <= tol.route) || det.flagged;
    if flagged {
        warn!("half-line Jost routes disagree at z = {}: spread {:.3e}, det mismatch {:.3e}", zp.z(), s, det_mismatch);
    }
    Ok(JostReport {
        z: *zp,
        jost,
        sine_representation,
        regular_representation,
        wronskian,
        det,
        spread: s,
        det_mismatch,
        flagged,
    })
}

#[derive(Clone, Debug)]
pub struct LineJostReport {
    pub z: SpectralPoint,
    /// `W(f_-, f_+) / (2ik)` at the right end of the window.
    pub wronskian: Complex64,
    /// Largest deviation of the Wronskian over the grid from its value at
    /// the right end, relative.
    pub wronskian_variation: f64,
    /// `1 - (2ik)^{-1} \int e^{-ikx} V f_+`.
    pub plus_representation: Complex64,
    /// `1 - (2ik)^{-1} \int e^{ikx} V f_-`.
    pub minus_representation: Complex64,
    pub det: DeterminantReport,
    pub spread: f64,
    pub det_mismatch: f64,
    pub flagged: bool,
}

impl LineJostReport {
    pub fn value(&self) -> Complex64 {
        self.wronskian
    }

    /// Transmission coefficient `1 / F`.
    pub fn transmission(&self) -> Complex64 {
        1.0 / self.wronskian
    }
}

/// Jost function (inverse transmission coefficient) of the line problem.
pub fn jost_function_line(pot: &Potential, zp: &SpectralPoint, grid: &Grid) -> Result<LineJostReport> {
    jost_function_line_with(pot, zp, grid, &Tolerances::default())
}

pub fn jost_function_line_with(
    pot: &Potential,
    zp: &SpectralPoint,
    grid: &Grid,
    tol: &Tolerances,
) -> Result<LineJostReport> {
    let k = zp.sqrt_z();
    let (fp, fm) = jost_solutions_line(pot, zp, grid)?;
    let last = grid.len() - 1;
    let two_ik = 2.0 * I * k;
    let wronskian = fm.wronskian(&fp, last) / two_ik;
    let wronskian_variation = (0..grid.len())
        .map(|i| (fm.wronskian(&fp, i) / two_ik - wronskian).norm() / wronskian.norm().max(1.0))
        .fold(0.0, f64::max);
    let vs = sampled(pot, grid);
    let nodes = grid.nodes();
    let ip: Vec<Complex64> = (0..nodes.len()).map(|i| (-I * k * nodes[i]).exp() * vs[i] * fp.values[i]).collect();
    let im: Vec<Complex64> = (0..nodes.len()).map(|i| (I * k * nodes[i]).exp() * vs[i] * fm.values[i]).collect();
    let plus_representation = 1.0 - grid.integrate(&ip) / two_ik;
    let minus_representation = 1.0 - grid.integrate(&im) / two_ik;
    let det = fredholm_det_with(&build_line_kernel(pot, zp)?, ONE, grid, tol)?;

    let routes = [wronskian, plus_representation, minus_representation];
    let s = spread(&routes);
    let det_mismatch = routes
        .iter()
        .flat_map(|r| [det.det_a, det.det_b].map(|d| (r - d).norm() / r.norm().max(1.0)))
        .fold(0.0, f64::max);
    let flagged = !(s <= tol.route) || !(det_mismatch <= tol.route) || det.flagged;
    if flagged {
        warn!("line Jost routes disagree at z = {}: spread {:.3e}, det mismatch {:.3e}", zp.z(), s, det_mismatch);
    }
    Ok(LineJostReport {
        z: *zp,
        wronskian,
        wronskian_variation,
        plus_representation,
        minus_representation,
        det,
        spread: s,
        det_mismatch,
        flagged,
    })
}

#[derive(Clone, Debug)]
pub struct SystemReport {
    pub z: SpectralPoint,
    /// `det_2(I - K~(z))` for the 2 x 2 system kernel (both routes inside).
    pub system: DeterminantReport,
    /// `det_2(I - K(z))` for the scalar line kernel.
    pub scalar: DeterminantReport,
    /// Jost function of the line problem.
    pub jost: Complex64,
    /// `F(z) exp(-i/(2k) \int V)`.
    pub jost_times_exp: Complex64,
    /// `|det_2(I - K~) - F exp(...)|`, relative.
    pub jost_residual: f64,
    /// `|det_2(I - K~) - det_2(I - K)|`, relative.
    pub scalar_residual: f64,
    pub flagged: bool,
}

impl SystemReport {
    pub fn det2(&self) -> Complex64 {
        self.system.det2_b
    }
}

/// `det_2` of the first-order system kernel, checked against the Jost function
/// and against the scalar line kernel.
pub fn first_order_system_det2(pot: &Potential, zp: &SpectralPoint, grid: &Grid) -> Result<SystemReport> {
    first_order_system_det2_with(pot, zp, grid, &Tolerances::default())
}

pub fn first_order_system_det2_with(
    pot: &Potential,
    zp: &SpectralPoint,
    grid: &Grid,
    tol: &Tolerances,
) -> Result<SystemReport> {
    let k = zp.sqrt_z();
    let system = fredholm_det2_with(&build_system_kernel(pot, zp)?, ONE, grid, tol)?;
    let scalar = fredholm_det2_with(&build_line_kernel(pot, zp)?, ONE, grid, tol)?;
    let line = jost_function_line_with(pot, zp, grid, tol)?;
    let jost = line.wronskian;
    let jost_times_exp = jost * (-I / (2.0 * k) * pot.integral(grid)).exp();
    let d2 = system.det2_b;
    let jost_residual = (d2 - jost_times_exp).norm() / d2.norm().max(1.0);
    let scalar_residual = (d2 - scalar.det2_b).norm() / d2.norm().max(1.0);
    let flagged = !(jost_residual <= tol.route) || !(scalar_residual <= tol.route) || system.flagged;
    if flagged {
        warn!(
            "system det2 identities fail at z = {}: Jost {:.3e}, scalar {:.3e}",
            zp.z(),
            jost_residual,
            scalar_residual
        );
    }
    Ok(SystemReport {
        z: *zp,
        system,
        scalar,
        jost,
        jost_times_exp,
        jost_residual,
        scalar_residual,
        flagged,
    })
}

/// Max entry of `T^{-1} [[0, 1], [V - z, 0]] T - (ik diag(1, -1) - (i/2k) V [[1, 1], [-1, -1]])`
/// with `T = [[1, 1], [ik, -ik]]`.
pub fn conjugation_residual(pot: &Potential, zp: &SpectralPoint, x: f64) -> f64 {
    let k = zp.sqrt_z();
    let v = pot.sample(x);
    let t = ComplexMatrix::from_rows(&[&[ONE, ONE], &[I * k, -I * k]]);
    let sys = ComplexMatrix::from_rows(&[&[ZERO, ONE], &[v - zp.z(), ZERO]]);
    let lhs = &(&t.inverse().expect("T is invertible for z != 0") * &sys) * &t;
    let c = I / (2.0 * k) * v;
    let rhs = ComplexMatrix::from_rows(&[&[I * k - c, -c], &[c, -I * k + c]]);
    lhs.max_abs_diff(&rhs)
}
