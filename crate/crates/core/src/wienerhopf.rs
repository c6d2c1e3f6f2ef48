//! Truncated Wiener-Hopf operators on `(0, tau)` with kernel
//! `k(t) = sum_l alpha_l e^{-lambda_l t}` for `t > 0` and
//! `sum_m beta_m e^{mu_m t}` for `t < 0`.
//!
//! Roots are stored as the values `i zeta_n`, the zeros of `1 - H` being at
//! `zeta = -i zeta_n`.

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Interval;
use crate::kernel::SemiSeparableKernel;
use crate::matrix::ComplexMatrix;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Largest `N = L + M` accepted by the subset-sum formulas.
pub const MAX_ROOTS: usize = 24;

/// Roots closer than this count as a multiple root.
pub const MULTIPLICITY_GUARD: f64 = 1e-8;

/// Root differences below this make the subset-sum formulas unusable.
pub const COINCIDENCE_GUARD: f64 = 1e-10;

const CHUNK: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct RationalSymbolKernel {
    alphas: Vec<Complex64>,
    lambdas: Vec<Complex64>,
    betas: Vec<Complex64>,
    mus: Vec<Complex64>,
    tau: f64,
}

fn pairwise_distinct(v: &[Complex64]) -> bool {
    v.iter().enumerate().all(|(i, a)| v[i + 1..].iter().all(|b| a != b))
}

fn finite(v: &[Complex64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

impl RationalSymbolKernel {
    pub fn new(
        alphas: Vec<Complex64>,
        lambdas: Vec<Complex64>,
        betas: Vec<Complex64>,
        mus: Vec<Complex64>,
        tau: f64,
    ) -> Result<Self> {
        if alphas.len() != lambdas.len() || betas.len() != mus.len() {
            return Err(Error::InvalidParameter("alpha/lambda and beta/mu lists must pair up".into()));
        }
        if alphas.is_empty() && betas.is_empty() {
            return Err(Error::InvalidParameter("need at least one exponential term".into()));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
        }
        if ![&alphas, &lambdas, &betas, &mus].iter().all(|v| finite(v)) {
            return Err(Error::NonFinite("symbol coefficients"));
        }
        if lambdas.iter().chain(&mus).any(|z| z.re <= 0.0) {
            return Err(Error::InvalidParameter("every lambda and mu needs a positive real part".into()));
        }
        if !pairwise_distinct(&lambdas) || !pairwise_distinct(&mus) {
            return Err(Error::DegenerateSymbol("repeated lambda or mu".into()));
        }
        Ok(Self {
            alphas,
            lambdas,
            betas,
            mus,
            tau,
        })
    }

    /// `k(t) = e^{-|t|}`.
    pub fn two_sided_exponential(tau: f64) -> Result<Self> {
        Self::new(vec![ONE], vec![ONE], vec![ONE], vec![ONE], tau)
    }

    pub fn alphas(&self) -> &[Complex64] {
        &self.alphas
    }

    pub fn lambdas(&self) -> &[Complex64] {
        &self.lambdas
    }

    pub fn betas(&self) -> &[Complex64] {
        &self.betas
    }

    pub fn mus(&self) -> &[Complex64] {
        &self.mus
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn l(&self) -> usize {
        self.alphas.len()
    }

    pub fn m(&self) -> usize {
        self.betas.len()
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(self.alphas.clone(), self.lambdas.clone(), self.betas.clone(), self.mus.clone(), tau)
    }

    /// `k(t)` for `t != 0`.
    pub fn kernel_eval(&self, t: f64) -> Result<Complex64> {
        if t > 0.0 {
            Ok(self.alphas.iter().zip(&self.lambdas).map(|(a, l)| a * (-l * t).exp()).sum())
        } else if t < 0.0 {
            Ok(self.betas.iter().zip(&self.mus).map(|(b, m)| b * (m * t).exp()).sum())
        } else {
            Err(Error::InvalidParameter("k(0) is two-valued; use k0_plus or k0_minus".into()))
        }
    }

    /// `k(0+) = sum alpha_l`.
    pub fn k0_plus(&self) -> Complex64 {
        self.alphas.iter().sum()
    }

    /// `k(0-) = sum beta_m`.
    pub fn k0_minus(&self) -> Complex64 {
        self.betas.iter().sum()
    }

    pub fn is_continuous(&self) -> bool {
        (self.k0_plus() - self.k0_minus()).norm() <= 1e-14 * self.k0_plus().norm().max(1.0)
    }

    /// `H(zeta) = \int k(t) e^{-zeta t} dt = sum alpha / (zeta + lambda) - sum beta / (zeta - mu)`.
    pub fn symbol(&self, zeta: Complex64) -> Complex64 {
        let a: Complex64 = self.alphas.iter().zip(&self.lambdas).map(|(a, l)| a / (zeta + l)).sum();
        let b: Complex64 = self.betas.iter().zip(&self.mus).map(|(b, m)| b / (zeta - m)).sum();
        a - b
    }

    pub fn one_minus_h(&self, zeta: Complex64) -> Complex64 {
        1.0 - self.symbol(zeta)
    }

    /// The kernel with `x` and `x'` exchanged: the two exponential lists swap.
    pub fn transpose(&self) -> Self {
        Self {
            alphas: self.betas.clone(),
            lambdas: self.mus.clone(),
            betas: self.alphas.clone(),
            mus: self.lambdas.clone(),
            tau: self.tau,
        }
    }

    /// `f1 = (alpha_l e^{-lambda_l x})`, `g1 = (e^{lambda_l x})^T`,
    /// `f2 = (beta_m e^{mu_m x})`, `g2 = (e^{-mu_m x})^T` on `(0, tau)`.
    pub fn to_semiseparable(&self) -> Result<SemiSeparableKernel> {
        let (a, l, b, m) = (self.alphas.clone(), self.lambdas.clone(), self.betas.clone(), self.mus.clone());
        let (l2, m2) = (l.clone(), m.clone());
        SemiSeparableKernel::new(
            1,
            self.l(),
            self.m(),
            move |x| ComplexMatrix::from_fn(1, a.len(), |_, j| a[j] * (-l[j] * x).exp()),
            move |x| ComplexMatrix::from_fn(l2.len(), 1, |i, _| (l2[i] * x).exp()),
            move |x| ComplexMatrix::from_fn(1, b.len(), |_, j| b[j] * (m[j] * x).exp()),
            move |x| ComplexMatrix::from_fn(m2.len(), 1, |i, _| (-m2[i] * x).exp()),
            Interval::finite(0.0, self.tau)?,
        )
    }

    /// Coefficients, lowest degree first, of the monic numerator of `1 - H`:
    /// `prod(z + lambda) prod(z - mu) - sum_l alpha_l prod_{l' != l}(z + lambda) prod(z - mu)
    ///  + sum_m beta_m prod(z + lambda) prod_{m' != m}(z - mu)`.
    pub fn numerator(&self) -> Vec<Complex64> {
        let minus_l: Vec<Complex64> = self.lambdas.iter().map(|l| -l).collect();
        let mut num = poly_from_roots(minus_l.iter().chain(&self.mus).copied());
        for (i, a) in self.alphas.iter().enumerate() {
            let roots = minus_l.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, r)| *r).chain(self.mus.iter().copied());
            poly_axpy(&mut num, -a, &poly_from_roots(roots));
        }
        for (i, b) in self.betas.iter().enumerate() {
            let roots = minus_l.iter().copied().chain(self.mus.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, r)| *r));
            poly_axpy(&mut num, *b, &poly_from_roots(roots));
        }
        num
    }
}

fn poly_from_roots(roots: impl Iterator<Item = Complex64>) -> Vec<Complex64> {
    let mut p = vec![ONE];
    for r in roots {
        let mut q = vec![ZERO; p.len() + 1];
        for (i, c) in p.iter().enumerate() {
            q[i + 1] += c;
            q[i] -= r * c;
        }
        p = q;
    }
    p
}

fn poly_axpy(p: &mut [Complex64], s: Complex64, q: &[Complex64]) {
    for (i, c) in q.iter().enumerate() {
        p[i] += s * c;
    }
}

fn poly_eval(p: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = ZERO;
    let mut d = ZERO;
    for c in p.iter().rev() {
        d = d * z + v;
        v = v * z + c;
    }
    (v, d)
}

/// Roots of a monic polynomial from the eigenvalues of its companion matrix,
/// each polished by three Newton steps.
pub fn monic_roots(p: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = p.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = p[n];
    let comp = Mat::<Complex64>::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -p[i] / lead
        } else if i == j + 1 {
            ONE
        } else {
            ZERO
        }
    });
    let mut roots = comp
        .eigenvalues()
        .map_err(|_| Error::DegenerateSymbol("companion eigenvalue iteration did not converge".into()))?;
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let (v, d) = poly_eval(p, *r);
            if d.norm() == 0.0 {
                break;
            }
            let step = v / d;
            if step.re.is_finite() && step.im.is_finite() {
                *r -= step;
            }
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

/// The `i zeta_n` and the residues `gamma_n` of `(1 - H)^{-1}` at `-i zeta_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolRoots {
    pub izetas: Vec<Complex64>,
    pub gammas: Vec<Complex64>,
}

pub fn find_roots(k: &RationalSymbolKernel) -> Result<SymbolRoots> {
    let num = k.numerator();
    let izetas: Vec<Complex64> = monic_roots(&num)?.into_iter().map(|r| -r).collect();
    let scale = izetas.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for i in 0..izetas.len() {
        for j in i + 1..izetas.len() {
            if (izetas[i] - izetas[j]).norm() < MULTIPLICITY_GUARD * scale {
                return Err(Error::DegenerateSymbol(format!(
                    "1 - H has a multiple zero near zeta = {}",
                    -izetas[i]
                )));
            }
        }
    }
    let gammas = (0..izetas.len())
        .map(|n| {
            let w = izetas[n];
            let mut g: Complex64 = k.lambdas.iter().map(|l| l - w).product::<Complex64>()
                * k.mus.iter().map(|m| -w - m).product::<Complex64>();
            for (j, v) in izetas.iter().enumerate() {
                if j != n {
                    g /= v - w;
                }
            }
            g
        })
        .collect();
    Ok(SymbolRoots { izetas, gammas })
}

/// Probe points for the partial-fraction identities, spread over an annulus
/// and kept away from the poles and zeros.
fn probe_points(k: &RationalSymbolKernel, roots: &SymbolRoots) -> Vec<Complex64> {
    let scale = k
        .lambdas
        .iter()
        .chain(&k.mus)
        .chain(&roots.izetas)
        .map(|z| z.norm())
        .fold(1.0, f64::max);
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let singular: Vec<Complex64> = k
        .lambdas
        .iter()
        .map(|l| -l)
        .chain(k.mus.iter().copied())
        .chain(roots.izetas.iter().map(|w| -w))
        .collect();
    let mut pts = Vec::new();
    let mut j = 0usize;
    while pts.len() < 10 {
        let r = scale * (0.5 + 0.25 * (j % 7) as f64);
        let z = Complex64::from_polar(r, golden * j as f64 + 0.3);
        if singular.iter().all(|s| (z - s).norm() > 0.05 * scale) {
            pts.push(z);
        }
        j += 1;
    }
    pts
}

/// Residuals of the algebraic identities satisfied by the roots.
#[derive(Clone, Debug, PartialEq)]
pub struct RootCheck {
    /// `prod(zeta + i zeta_n) / (prod(zeta + lambda) prod(zeta - mu))` vs `1 - H`.
    pub factorization: f64,
    /// `1 + sum gamma_n / (zeta + i zeta_n)` vs `(1 - H)^{-1}`.
    pub partial_fractions: f64,
    /// `max_m |1 + sum gamma_n / (i zeta_n + mu_m)|`.
    pub cancellation: f64,
    /// `beta_m` rebuilt from the roots.
    pub beta_reconstruction: f64,
    /// Ratio of the residues to the literal printed product with
    /// `(i zeta_n - i zeta_n')^{-1}`; equals `(-1)^{N-1}` for every `n`.
    pub literal_product_ratio: Vec<Complex64>,
}

impl RootCheck {
    pub fn max_residual(&self) -> f64 {
        self.factorization
            .max(self.partial_fractions)
            .max(self.cancellation)
            .max(self.beta_reconstruction)
    }
}

pub fn check_roots(k: &RationalSymbolKernel, roots: &SymbolRoots) -> RootCheck {
    let mut factorization: f64 = 0.0;
    let mut partial_fractions: f64 = 0.0;
    for z in probe_points(k, roots) {
        let exact = k.one_minus_h(z);
        let prod = roots.izetas.iter().map(|w| z + w).product::<Complex64>()
            / k.lambdas.iter().map(|l| z + l).product::<Complex64>()
            / k.mus.iter().map(|m| z - m).product::<Complex64>();
        factorization = factorization.max((prod - exact).norm() / exact.norm().max(1e-300));
        let inv = 1.0 + roots.izetas.iter().zip(&roots.gammas).map(|(w, g)| g / (z + w)).sum::<Complex64>();
        partial_fractions = partial_fractions.max((inv - 1.0 / exact).norm() / (1.0 / exact).norm().max(1e-300));
    }
    let cancellation = k
        .mus
        .iter()
        .map(|m| (1.0 + roots.izetas.iter().zip(&roots.gammas).map(|(w, g)| g / (w + m)).sum::<Complex64>()).norm())
        .fold(0.0, f64::max);
    let beta_reconstruction = k
        .mus
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let mut b = roots.izetas.iter().map(|w| m + w).product::<Complex64>()
                / k.lambdas.iter().map(|l| m + l).product::<Complex64>();
            for (j, mp) in k.mus.iter().enumerate() {
                if j != i {
                    b /= m - mp;
                }
            }
            (b - k.betas[i]).norm() / k.betas[i].norm().max(1e-300)
        })
        .fold(0.0, f64::max);
    let literal_product_ratio = (0..roots.izetas.len())
        .map(|n| {
            let w = roots.izetas[n];
            let mut g: Complex64 = k.lambdas.iter().map(|l| l - w).product::<Complex64>()
                * k.mus.iter().map(|m| -w - m).product::<Complex64>();
            for (j, v) in roots.izetas.iter().enumerate() {
                if j != n {
                    g /= w - v;
                }
            }
            roots.gammas[n] / g
        })
        .collect();
    RootCheck {
        factorization,
        partial_fractions,
        cancellation,
        beta_reconstruction,
        literal_product_ratio,
    }
}

/// `G_{m,m'} = delta + e^{-mu_m tau} beta_m' sum_n gamma_n e^{-i zeta_n tau}
/// / ((mu_m + i zeta_n)(mu_m' + i zeta_n))`.
pub fn g_matrix(k: &RationalSymbolKernel, roots: &SymbolRoots) -> ComplexMatrix {
    let tau = k.tau;
    let mm = k.m();
    ComplexMatrix::from_fn(mm, mm, |i, j| {
        let s: Complex64 = roots
            .izetas
            .iter()
            .zip(&roots.gammas)
            .map(|(w, g)| g * (-w * tau).exp() / ((k.mus[i] + w) * (k.mus[j] + w)))
            .sum();
        let d = if i == j { ONE } else { ZERO };
        d + (-k.mus[i] * tau).exp() * k.betas[j] * s
    })
}

/// `det(I_M - G) exp(tau k(0-))`; 1 when `M = 0`.
pub fn det2_via_g(k: &RationalSymbolKernel, roots: &SymbolRoots) -> Complex64 {
    if k.m() == 0 {
        return ONE;
    }
    let g = g_matrix(k, roots);
    (&ComplexMatrix::identity(k.m()) - &g).det() * (k.tau * k.k0_minus()).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DaySide {
    /// Sum over subsets of size `L`.
    A,
    /// Sum over subsets of size `M`.
    B,
}

/// All `size`-subsets of `0..n` as bitmasks, in increasing numeric order.
fn subsets(n: usize, size: usize) -> Vec<u32> {
    if size == 0 {
        return vec![0];
    }
    if size > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut s: u32 = (1u32 << size) - 1;
    let limit: u64 = 1u64 << n;
    while (s as u64) < limit {
        out.push(s);
        let c = s & s.wrapping_neg();
        let r = s + c;
        s = (((r ^ s) >> 2) / c) | r;
        if r == 0 {
            break;
        }
    }
    out
}

fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    match v.len() {
        0 => ZERO,
        1 => v[0],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

fn check_coincidence(roots: &SymbolRoots) -> Result<()> {
    let w = &roots.izetas;
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if (w[i] - w[j]).norm() < COINCIDENCE_GUARD {
                return Err(Error::DegenerateSymbol(format!(
                    "roots i zeta = {} and {} nearly coincide",
                    w[i], w[j]
                )));
            }
        }
    }
    Ok(())
}

/// The subset-sum formulas for `det_2(I - K)`.
///
/// Side `A` sums over `L~` with `|L~| = L`:
/// `exp(tau k(0-) - tau sum mu) sum V_L~ exp(-tau sum_{m not in L~} i zeta_m)`;
/// side `B` sums over `M~` with `|M~| = M`:
/// `exp(tau k(0+) - tau sum lambda) sum W_M~ exp(tau sum_{l not in M~} i zeta_l)`.
///
/// In both, the cross factor is `(i zeta_p - i zeta_q)^{-1}` with `p` in the
/// complement and `q` in the subset for side `B`, and `p` in the subset and
/// `q` in the complement for side `A`.
pub fn day_formula(k: &RationalSymbolKernel, roots: &SymbolRoots, side: DaySide) -> Result<Complex64> {
    let n = roots.izetas.len();
    if n > MAX_ROOTS {
        return Err(Error::CombinatorialSize(n, MAX_ROOTS));
    }
    if k.l() == 0 || k.m() == 0 {
        return Ok(ONE);
    }
    check_coincidence(roots)?;
    let w = &roots.izetas;
    let tau = k.tau;
    // a_n = prod_l (lambda_l - i zeta_n), b_n = prod_m (mu_m + i zeta_n)
    let a: Vec<Complex64> = w.iter().map(|z| k.lambdas.iter().map(|l| l - z).product()).collect();
    let b: Vec<Complex64> = w.iter().map(|z| k.mus.iter().map(|m| m + z).product()).collect();
    let c0: Complex64 = k
        .lambdas
        .iter()
        .flat_map(|l| k.mus.iter().map(move |m| 1.0 / (m + l)))
        .product();

    let (size, prefactor) = match side {
        DaySide::A => (k.l(), (tau * k.k0_minus() - tau * k.mus.iter().sum::<Complex64>()).exp()),
        DaySide::B => (k.m(), (tau * k.k0_plus() - tau * k.lambdas.iter().sum::<Complex64>()).exp()),
    };
    let masks = subsets(n, size);
    let term = |mask: u32| -> Complex64 {
        let inside: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let outside: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 0).collect();
        match side {
            DaySide::A => {
                let mut t = c0;
                for &m in &outside {
                    t *= a[m];
                }
                for &l in &inside {
                    t *= b[l];
                    for &m in &outside {
                        t /= w[l] - w[m];
                    }
                }
                let e: Complex64 = outside.iter().map(|&m| w[m]).sum();
                t * (-tau * e).exp()
            }
            DaySide::B => {
                let mut t = c0;
                for &m in &inside {
                    t *= a[m];
                }
                for &l in &outside {
                    t *= b[l];
                    for &m in &inside {
                        t /= w[l] - w[m];
                    }
                }
                let e: Complex64 = outside.iter().map(|&l| w[l]).sum();
                t * (tau * e).exp()
            }
        }
    };
    let partial: Vec<Complex64> = masks
        .par_chunks(CHUNK)
        .map(|chunk| pairwise_sum(&chunk.iter().map(|&s| term(s)).collect::<Vec<_>>()))
        .collect();
    let total = prefactor * pairwise_sum(&partial);
    if !(total.re.is_finite() && total.im.is_finite()) {
        return Err(Error::NonFinite("subset-sum determinant formula"));
    }
    Ok(total)
}

/// Residuals of the Cauchy-matrix machinery behind the subset-sum formulas.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyReport {
    /// `I - G` vs `diag(e^{-mu tau}) Gamma diag(beta)`.
    pub factorization: f64,
    /// `Gamma` vs `A diag(gamma e^{-i zeta tau}) B`.
    pub gamma_factorization: f64,
    /// `A_psi^{-1}` vs `D1 A_psi^T D2` over the tested subsets.
    pub cauchy_inverse: f64,
    /// Cauchy-Binet sum vs `det Gamma`.
    pub cauchy_binet: f64,
    /// `det(I - G)` vs `e^{-tau sum mu} det(Gamma) prod(beta)`.
    pub determinant_route: f64,
}

impl CauchyReport {
    pub fn max_residual(&self) -> f64 {
        self.factorization
            .max(self.gamma_factorization)
            .max(self.cauchy_inverse)
            .max(self.cauchy_binet)
            .max(self.determinant_route)
    }
}

fn rel_mat(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.max_abs_diff(b) / a.max_abs().max(1e-300)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(1e-300)
}

pub fn cauchy_factorization_check(k: &RationalSymbolKernel, roots: &SymbolRoots) -> Result<CauchyReport> {
    let n = roots.izetas.len();
    if n > MAX_ROOTS {
        return Err(Error::CombinatorialSize(n, MAX_ROOTS));
    }
    let mm = k.m();
    if mm == 0 {
        return Ok(CauchyReport {
            factorization: 0.0,
            gamma_factorization: 0.0,
            cauchy_inverse: 0.0,
            cauchy_binet: 0.0,
            determinant_route: 0.0,
        });
    }
    check_coincidence(roots)?;
    let tau = k.tau;
    let w = &roots.izetas;
    let mus = &k.mus;
    let weights: Vec<Complex64> = w.iter().zip(&roots.gammas).map(|(z, g)| g * (-z * tau).exp()).collect();

    let gamma = ComplexMatrix::from_fn(mm, mm, |i, j| {
        -(0..n).map(|p| weights[p] / ((mus[i] + w[p]) * (mus[j] + w[p]))).sum::<Complex64>()
    });
    let g = g_matrix(k, roots);
    let i_minus_g = &ComplexMatrix::identity(mm) - &g;
    let e_mu: Vec<Complex64> = mus.iter().map(|m| (-m * tau).exp()).collect();
    let rebuilt = &(&ComplexMatrix::diagonal(&e_mu) * &gamma) * &ComplexMatrix::diagonal(&k.betas);
    let factorization = rel_mat(&i_minus_g, &rebuilt);

    let a = ComplexMatrix::from_fn(mm, n, |i, p| 1.0 / (mus[i] + w[p]));
    let b = ComplexMatrix::from_fn(n, mm, |p, i| -1.0 / (mus[i] + w[p]));
    let gamma_factorization = rel_mat(&gamma, &(&(&a * &ComplexMatrix::diagonal(&weights)) * &b));

    let masks = subsets(n, mm);
    let columns = |mask: u32| -> Vec<usize> { (0..n).filter(|&i| mask >> i & 1 == 1).collect() };
    let a_psi = |cols: &[usize]| ComplexMatrix::from_fn(mm, mm, |i, j| a[(i, cols[j])]);

    let mut cauchy_inverse: f64 = 0.0;
    let picks = [0, masks.len() / 2, masks.len() - 1];
    for &pick in &picks {
        let psi = columns(masks[pick]);
        let ap = a_psi(&psi);
        let d1: Vec<Complex64> = (0..mm)
            .map(|j| {
                let mut d: Complex64 = mus.iter().map(|m| m + w[psi[j]]).product();
                for (q, &p) in psi.iter().enumerate() {
                    if q != j {
                        d /= w[psi[j]] - w[p];
                    }
                }
                d
            })
            .collect();
        let d2: Vec<Complex64> = (0..mm)
            .map(|i| {
                let mut d: Complex64 = psi.iter().map(|&p| mus[i] + w[p]).product();
                for (q, mq) in mus.iter().enumerate() {
                    if q != i {
                        d /= mus[i] - mq;
                    }
                }
                d
            })
            .collect();
        let formula = &(&ComplexMatrix::diagonal(&d1) * &ap.transpose()) * &ComplexMatrix::diagonal(&d2);
        let inv = ap.inverse()?;
        cauchy_inverse = cauchy_inverse.max(rel_mat(&inv, &formula));
    }

    let binet: Vec<Complex64> = masks
        .iter()
        .map(|&mask| {
            let psi = columns(mask);
            let bp = ComplexMatrix::from_fn(mm, mm, |i, j| b[(psi[i], j)]);
            a_psi(&psi).det() * bp.det() * psi.iter().map(|&p| weights[p]).product::<Complex64>()
        })
        .collect();
    let det_gamma = gamma.det();
    let cauchy_binet = rel(det_gamma, pairwise_sum(&binet));

    let lhs = i_minus_g.det();
    let rhs = (-tau * mus.iter().sum::<Complex64>()).exp() * det_gamma * k.betas.iter().product::<Complex64>();
    let determinant_route = rel(lhs, rhs);

    Ok(CauchyReport {
        factorization,
        gamma_factorization,
        cauchy_inverse,
        cauchy_binet,
        determinant_route,
    })
}

/// Every closed-form value of `det_2(I - K)` for one symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct WienerHopfReport {
    pub via_g: Complex64,
    pub day_a: Complex64,
    pub day_b: Complex64,
    /// Largest pairwise relative difference of the three values.
    pub spread: f64,
}

pub fn wiener_hopf_det2(k: &RationalSymbolKernel) -> Result<WienerHopfReport> {
    let roots = find_roots(k)?;
    let via_g = det2_via_g(k, &roots);
    let day_a = day_formula(k, &roots, DaySide::A)?;
    let day_b = day_formula(k, &roots, DaySide::B)?;
    let vals = [via_g, day_a, day_b];
    let mut spread: f64 = 0.0;
    for x in &vals {
        for y in &vals {
            spread = spread.max((x - y).norm() / x.norm().max(1.0));
        }
    }
    Ok(WienerHopfReport {
        via_g,
        day_a,
        day_b,
        spread,
    })
}
