//! Volterra equations for `fhat1`, `fhat2` and the fundamental matrix `U`.
//!
//! All sweeps use the product trapezoid rule on the grid nodes with an
//! implicit self term, so node `i` costs one `m x m` solve.

use log::warn;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::{KernelSamples, SemiSeparableKernel};
use crate::matrix::{ComplexMatrix, Lu};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Integrate over `[x_0, x]`, starting at the first node.
    Forward,
    /// Integrate over `[x, x_last]`, starting at the last node.
    Backward,
}

/// Solution of `y(x) = r(x) + sigma P(x) \int Q(x') y(x') dx'` over the
/// direction's integration range.
#[derive(Clone, Debug)]
pub struct Sweep {
    /// `y` at each node (`m x p`).
    pub y: Vec<ComplexMatrix>,
    /// The running integral `\int Q y` at each node (`r x p`); zero at the
    /// starting node.
    pub integral: Vec<ComplexMatrix>,
}

/// Generic separable Volterra sweep. `p_fac[i]` is `m x r`, `q_fac[i]` is
/// `r x m`, `rhs[i]` is `m x p`, all sampled on `nodes`.
pub fn sweep(
    nodes: &[f64],
    p_fac: &[ComplexMatrix],
    q_fac: &[ComplexMatrix],
    rhs: &[ComplexMatrix],
    sigma: Complex64,
    dir: Direction,
) -> Result<Sweep> {
    let n = nodes.len();
    assert!(n >= 1 && p_fac.len() == n && q_fac.len() == n && rhs.len() == n);
    let (m, p) = rhs[0].shape();
    let r = q_fac[0].rows();
    let order: Vec<usize> = match dir {
        Direction::Forward => (0..n).collect(),
        Direction::Backward => (0..n).rev().collect(),
    };

    let mut y = vec![ComplexMatrix::zeros(m, p); n];
    let mut integral = vec![ComplexMatrix::zeros(r, p); n];
    let eye = ComplexMatrix::identity(m);

    let first = order[0];
    y[first] = rhs[first].clone();
    integral[first] = ComplexMatrix::zeros(r, p);
    let mut q_prev = &q_fac[first] * &y[first];

    for w in order.windows(2) {
        let (prev, i) = (w[0], w[1]);
        let half = Complex64::new(0.5 * (nodes[i] - nodes[prev]).abs(), 0.0);
        let mut partial = integral[prev].clone();
        partial.axpy(half, &q_prev);

        let mut b = rhs[i].clone();
        b.axpy(sigma, &(&p_fac[i] * &partial));
        let mut step = eye.clone();
        step.axpy(-sigma * half, &(&p_fac[i] * &q_fac[i]));
        let yi = Lu::new(&step)
            .map_err(|_| Error::Singular("implicit Volterra step"))?
            .solve(&b)?;

        let qi = &q_fac[i] * &yi;
        partial.axpy(half, &qi);
        integral[i] = partial;
        y[i] = yi;
        q_prev = qi;
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Volterra sweep"));
    }
    Ok(Sweep { y, integral })
}

/// Samples of `fhat_j` together with the running integrals of `B fhat_j`.
#[derive(Clone, Debug)]
pub struct VolterraSolution {
    pub grid: Grid,
    pub alpha: Complex64,
    /// `fhat` at each node (`m x n_j`).
    pub fhat: Vec<ComplexMatrix>,
    /// `\int B fhat` over `[x, b*]` for `fhat1`, over `[a*, x]` for `fhat2`
    /// (`n x n_j`, top block uses `g1`, bottom block uses `-g2`).
    pub integral: Vec<ComplexMatrix>,
}

fn check_samples(s: &KernelSamples) -> Result<()> {
    s.grid.require_trapezoid("the Volterra sweep")?;
    if s.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    Ok(())
}

/// Emits a warning when `step` is too coarse for `exp(i k x)` factors.
pub fn check_step(step: f64, sqrt_z: Complex64) {
    let wavenumber = sqrt_z.re.abs();
    if wavenumber > 0.0 {
        let h_max = 2.0 * std::f64::consts::PI / wavenumber / 16.0;
        if step > h_max {
            warn!(
                "grid step {:.3e} does not resolve oscillations of wavenumber {:.3e} (need <= {:.3e})",
                step,
                wavenumber,
                h_max
            );
        }
    }
}

/// [`check_step`] with the largest step of the grid.
pub fn check_resolution(grid: &Grid, sqrt_z: Complex64) {
    check_step(grid.max_step(), sqrt_z);
}

/// `fhat1(x) = f1(x) - alpha \int_x^b H(x, x') fhat1(x') dx'`.
pub fn solve_fhat1(kern: &SemiSeparableKernel, alpha: Complex64, grid: &Grid) -> Result<VolterraSolution> {
    solve_fhat1_sampled(&kern.sample(grid)?, alpha)
}

/// `fhat2(x) = f2(x) + alpha \int_a^x H(x, x') fhat2(x') dx'`.
pub fn solve_fhat2(kern: &SemiSeparableKernel, alpha: Complex64, grid: &Grid) -> Result<VolterraSolution> {
    solve_fhat2_sampled(&kern.sample(grid)?, alpha)
}

pub fn solve_fhat1_sampled(s: &KernelSamples, alpha: Complex64) -> Result<VolterraSolution> {
    check_samples(s)?;
    let p: Vec<_> = (0..s.len()).map(|i| s.c(i)).collect();
    let q: Vec<_> = (0..s.len()).map(|i| s.b(i)).collect();
    let sw = sweep(s.grid.nodes(), &p, &q, &s.f1, -alpha, Direction::Backward)?;
    Ok(VolterraSolution {
        grid: s.grid.clone(),
        alpha,
        fhat: sw.y,
        integral: sw.integral,
    })
}

pub fn solve_fhat2_sampled(s: &KernelSamples, alpha: Complex64) -> Result<VolterraSolution> {
    check_samples(s)?;
    let p: Vec<_> = (0..s.len()).map(|i| s.c(i)).collect();
    let q: Vec<_> = (0..s.len()).map(|i| s.b(i)).collect();
    let sw = sweep(s.grid.nodes(), &p, &q, &s.f2, alpha, Direction::Forward)?;
    Ok(VolterraSolution {
        grid: s.grid.clone(),
        alpha,
        fhat: sw.y,
        integral: sw.integral,
    })
}

/// `U(x, alpha)` sampled on a grid.
#[derive(Clone, Debug)]
pub struct FundamentalSolution {
    pub grid: Grid,
    pub alpha: Complex64,
    pub n1: usize,
    pub n2: usize,
    pub u: Vec<ComplexMatrix>,
}

/// Assembles `U` from the two sweeps:
///
/// ```text
/// U = [ I - a \int_x^b g1 fhat1     a \int_a^x g1 fhat2   ]
///     [     a \int_x^b g2 fhat1     I - a \int_a^x g2 fhat2 ]
/// ```
pub fn assemble_u(
    n1: usize,
    n2: usize,
    alpha: Complex64,
    fhat1: &VolterraSolution,
    fhat2: &VolterraSolution,
) -> Result<FundamentalSolution> {
    let len = fhat1.integral.len();
    if fhat2.integral.len() != len {
        return Err(Error::InvalidGrid("fhat1 and fhat2 were computed on different grids".into()));
    }
    let n = n1 + n2;
    let mut u = Vec::with_capacity(len);
    for i in 0..len {
        let s1 = &fhat1.integral[i];
        let s2 = &fhat2.integral[i];
        let mut ui = ComplexMatrix::identity(n);
        for r in 0..n1 {
            for c in 0..n1 {
                ui[(r, c)] -= alpha * s1[(r, c)];
            }
            for c in 0..n2 {
                ui[(r, n1 + c)] = alpha * s2[(r, c)];
            }
        }
        for r in 0..n2 {
            for c in 0..n1 {
                // bottom block of the integral carries -g2
                ui[(n1 + r, c)] = -alpha * s1[(n1 + r, c)];
            }
            for c in 0..n2 {
                ui[(n1 + r, n1 + c)] += alpha * s2[(n1 + r, c)];
            }
        }
        u.push(ui);
    }
    Ok(FundamentalSolution {
        grid: fhat1.grid.clone(),
        alpha,
        n1,
        n2,
        u,
    })
}

/// Both sweeps plus assembly.
pub fn fundamental_solution(kern: &SemiSeparableKernel, alpha: Complex64, grid: &Grid) -> Result<FundamentalSolution> {
    fundamental_solution_sampled(&kern.sample(grid)?, alpha)
}

pub fn fundamental_solution_sampled(s: &KernelSamples, alpha: Complex64) -> Result<FundamentalSolution> {
    let f1 = solve_fhat1_sampled(s, alpha)?;
    let f2 = solve_fhat2_sampled(s, alpha)?;
    assemble_u(s.n1, s.n2, alpha, &f1, &f2)
}

impl FundamentalSolution {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn u11(&self, i: usize) -> ComplexMatrix {
        self.u[i].block(0, 0, self.n1, self.n1)
    }

    pub fn u12(&self, i: usize) -> ComplexMatrix {
        self.u[i].block(0, self.n1, self.n1, self.n2)
    }

    pub fn u21(&self, i: usize) -> ComplexMatrix {
        self.u[i].block(self.n1, 0, self.n2, self.n1)
    }

    pub fn u22(&self, i: usize) -> ComplexMatrix {
        self.u[i].block(self.n1, self.n1, self.n2, self.n2)
    }

    pub fn det_at(&self, i: usize) -> Complex64 {
        self.u[i].det()
    }

    /// `det U(a*)`.
    pub fn det_a(&self) -> Complex64 {
        self.det_at(0)
    }

    /// `det U(b*)`.
    pub fn det_b(&self) -> Complex64 {
        self.det_at(self.len() - 1)
    }

    /// Linear interpolation of `U` between grid nodes.
    pub fn at(&self, x: f64) -> ComplexMatrix {
        let (i, t) = self.grid.locate(x);
        let mut out = self.u[i].scale(Complex64::new(1.0 - t, 0.0));
        out.axpy(Complex64::new(t, 0.0), &self.u[i + 1]);
        out
    }

    /// Largest relative deviation of `det U(x_i)` from
    /// `det U(x_0) exp(alpha \int_{x_0}^{x_i} tr A)`, the integral taken by
    /// the trapezoid rule.
    pub fn liouville_residual(&self, s: &KernelSamples) -> f64 {
        let nodes = self.grid.nodes();
        let d0 = self.det_a();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut tr_prev = s.trace_a(0);
        let mut worst: f64 = 0.0;
        for i in 1..self.len() {
            let tr = s.trace_a(i);
            acc += 0.5 * (nodes[i] - nodes[i - 1]) * (tr + tr_prev);
            tr_prev = tr;
            let expected = d0 * (self.alpha * acc).exp();
            let got = self.det_at(i);
            worst = worst.max((got - expected).norm() / expected.norm().max(1.0));
        }
        worst
    }

    /// Largest relative deviation of `det U(x_i)` from its trapezoidal
    /// counterpart
    /// `det U(x_{i-1}) det(I + a h/2 H_{i-1}) / det(I - a h/2 H_i)`,
    /// `H = f1 g1 - f2 g2`, which the sweeps satisfy up to rounding.
    pub fn discrete_liouville_residual(&self, s: &KernelSamples) -> f64 {
        let nodes = self.grid.nodes();
        let diag = |i: usize| &(&s.f1[i] * &s.g1[i]) - &(&s.f2[i] * &s.g2[i]);
        let eye = ComplexMatrix::identity(diag(0).rows());
        let mut worst: f64 = 0.0;
        for i in 1..self.len() {
            let c = self.alpha * 0.5 * (nodes[i] - nodes[i - 1]);
            let mut plus = eye.clone();
            plus.axpy(c, &diag(i - 1));
            let mut minus = eye.clone();
            minus.axpy(-c, &diag(i));
            let expected = self.det_at(i - 1) * plus.det() / minus.det();
            let got = self.det_at(i);
            worst = worst.max((got - expected).norm() / expected.norm().max(1.0));
        }
        worst
    }

    /// Max entry of `(U(x_{i+1}) - U(x_{i-1})) / (x_{i+1} - x_{i-1}) - alpha A(x_i) U(x_i)`
    /// over interior nodes.
    pub fn ode_residual(&self, s: &KernelSamples) -> f64 {
        let nodes = self.grid.nodes();
        let mut worst: f64 = 0.0;
        for i in 1..self.len().saturating_sub(1) {
            let h = nodes[i + 1] - nodes[i - 1];
            let mut d = &self.u[i + 1] - &self.u[i - 1];
            d = d.scale(Complex64::new(1.0 / h, 0.0));
            let a = ComplexMatrix::from_blocks(
                &(&s.g1[i] * &s.f1[i]),
                &(&s.g1[i] * &s.f2[i]),
                &-&(&s.g2[i] * &s.f1[i]),
                &-&(&s.g2[i] * &s.f2[i]),
            );
            let rhs = (&a * &self.u[i]).scale(self.alpha);
            worst = worst.max(d.max_abs_diff(&rhs));
        }
        worst
    }
}

/// Checks `(I - alpha H_a)(I + alpha J_a) = I` on the grid, where
/// `J_a(x, x') = C(x) U(x) U(x')^{-1} B(x')` for `x' < x`. Both operators
/// are discretized with the product trapezoid weights of the sweep. Returns
/// the largest entry of the residual.
pub fn volterra_resolvent_check(kern: &SemiSeparableKernel, alpha: Complex64, grid: &Grid) -> Result<f64> {
    let s = kern.sample(grid)?;
    let fs = fundamental_solution_sampled(&s, alpha)?;
    let n = grid.len();
    let m = s.m;
    let nodes = grid.nodes();

    // rows of U(x')^{-1} B(x') for every node, and C(x) U(x)
    let mut right = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    for j in 0..n {
        let lu = Lu::new(&fs.u[j]).map_err(|_| Error::Singular("U(x') in the Volterra resolvent"))?;
        if lu.pivot_ratio() < 1e-12 {
            warn!("U(x) is badly conditioned at x = {}", nodes[j]);
        }
        right.push(lu.solve(&s.b(j))?);
        left.push(&s.c(j) * &fs.u[j]);
    }

    // product trapezoid weight of node j in \int_{x_0}^{x_i}
    let weight = |i: usize, j: usize| -> f64 {
        if j > i || i == 0 {
            return 0.0;
        }
        let mut w = 0.0;
        if j > 0 {
            w += 0.5 * (nodes[j] - nodes[j - 1]);
        }
        if j < i {
            w += 0.5 * (nodes[j + 1] - nodes[j]);
        }
        w
    };

    let big = n * m;
    let mut lhs = ComplexMatrix::identity(big);
    let mut rhs = ComplexMatrix::identity(big);
    for i in 0..n {
        for j in 0..=i {
            let w = weight(i, j);
            if w == 0.0 {
                continue;
            }
            let h = s.h(i, j);
            let jk = &left[i] * &right[j];
            for r in 0..m {
                for c in 0..m {
                    lhs[(i * m + r, j * m + c)] -= alpha * w * h[(r, c)];
                    rhs[(i * m + r, j * m + c)] += alpha * w * jk[(r, c)];
                }
            }
        }
    }
    let prod = &lhs * &rhs;
    Ok(prod.max_abs_diff(&ComplexMatrix::identity(big)))
}
