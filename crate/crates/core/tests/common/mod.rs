#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semisep::ode::propagate;
use semisep::schrodinger::{Potential, SpectralPoint};
use semisep::wienerhopf::RationalSymbolKernel;
use semisep::{Complex64, ComplexMatrix, Interval, SemiSeparableKernel};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

pub fn random_complex(r: &mut ChaCha8Rng) -> Complex64 {
    c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
}

pub fn random_in_unit_disk(r: &mut ChaCha8Rng) -> Complex64 {
    loop {
        let z = random_complex(r);
        if z.norm() < 1.0 {
            return z;
        }
    }
}

/// Entries `a + b x + c cos(d x)` with random coefficients.
fn random_matrix_fn(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static {
    let coeffs: Vec<[Complex64; 3]> = (0..rows * cols)
        .map(|_| [random_complex(r), random_complex(r), random_complex(r)])
        .collect();
    let freqs: Vec<f64> = (0..rows * cols).map(|_| r.gen_range(0.5..3.0)).collect();
    move |x| ComplexMatrix::from_fn(rows, cols, |i, j| {
        let k = i * cols + j;
        let [a, b, cc] = coeffs[k];
        a + b * x + cc * (freqs[k] * x).cos()
    })
}

/// Random smooth kernel on `(0, 1)` with the given block sizes.
pub fn random_kernel(r: &mut ChaCha8Rng, m: usize, n1: usize, n2: usize) -> SemiSeparableKernel {
    SemiSeparableKernel::new(
        m,
        n1,
        n2,
        random_matrix_fn(r, m, n1),
        random_matrix_fn(r, n1, m),
        random_matrix_fn(r, m, n2),
        random_matrix_fn(r, n2, m),
        Interval::finite(0.0, 1.0).unwrap(),
    )
    .unwrap()
}

/// Random smooth kernel with `f2 g2 = f1 g1` on the diagonal, so that `K` is
/// continuous: `f2 = [f1, h]`, `g2 = [g1; 0]` plus a term vanishing at `x = x'`.
pub fn random_continuous_kernel(r: &mut ChaCha8Rng, m: usize, n1: usize) -> SemiSeparableKernel {
    let f1 = random_matrix_fn(r, m, n1);
    let g1 = random_matrix_fn(r, n1, m);
    let p = random_matrix_fn(r, m, m);
    let q = random_matrix_fn(r, m, m);
    let f1 = std::sync::Arc::new(f1);
    let g1 = std::sync::Arc::new(g1);
    let (f1a, g1a, f1b, g1b) = (f1.clone(), g1.clone(), f1.clone(), g1.clone());
    let p = std::sync::Arc::new(p);
    let q = std::sync::Arc::new(q);
    let (pa, qa) = (p.clone(), q.clone());
    // K(x, x') = f1 g1 + P(x)(x - x') Q(x') above the diagonal
    SemiSeparableKernel::new(
        m,
        n1,
        n1 + 2 * m,
        move |x| f1a(x),
        move |x| g1a(x),
        move |x| f1b(x).hstack(&pa(x).scale(c(x, 0.0))).hstack(&pa(x).scale(c(-1.0, 0.0))),
        move |x| g1b(x).vstack(&qa(x)).vstack(&qa(x).scale(c(x, 0.0))),
        Interval::finite(0.0, 1.0).unwrap(),
    )
    .unwrap()
}

pub fn random_symbol(r: &mut ChaCha8Rng, l: usize, m: usize, tau: f64) -> RationalSymbolKernel {
    let mut draw = |n: usize| -> (Vec<Complex64>, Vec<Complex64>) {
        let coef = (0..n).map(|_| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
        let rate = (0..n).map(|_| c(r.gen_range(0.5..2.0), r.gen_range(-1.0..1.0))).collect();
        (coef, rate)
    };
    let (a, la) = draw(l);
    let (b, mu) = draw(m);
    RationalSymbolKernel::new(a, la, b, mu, tau).unwrap()
}

/// Jost function of the half-line problem by RK4 from the right end of the window.
pub fn shoot_halfline(pot: &Potential, z: Complex64, step: f64) -> Complex64 {
    let k = SpectralPoint::new(z).unwrap().sqrt_z();
    let hi = pot.window().hi();
    let e = (Complex64::i() * k * hi).exp();
    let v = |x: f64| pot.value(x);
    propagate(&v, z, hi, 0.0, [e, Complex64::i() * k * e], step, pot.breakpoints())[0]
}

/// `W(f_-, f_+) / (2ik)` by RK4 from both ends of the window.
pub fn shoot_line(pot: &Potential, z: Complex64, step: f64) -> Complex64 {
    let k = SpectralPoint::new(z).unwrap().sqrt_z();
    let i = Complex64::i();
    let w = pot.window();
    let (lo, hi) = (w.lo(), w.hi());
    let v = |x: f64| pot.value(x);
    let em = (-i * k * lo).exp();
    let fm = propagate(&v, z, lo, hi, [em, -i * k * em], step, pot.breakpoints());
    let ep = (i * k * hi).exp();
    let fp = [ep, i * k * ep];
    (fm[0] * fp[1] - fm[1] * fp[0]) / (2.0 * i * k)
}

/// Jost function of `V = depth` on `(0, 1)`: `e^{ik}(cos q - ik sin(q)/q)`, `q = sqrt(z - depth)`.
pub fn square_well_jost(depth: f64, z: Complex64) -> Complex64 {
    let k = SpectralPoint::new(z).unwrap().sqrt_z();
    let q = (z - depth).sqrt();
    let i = Complex64::i();
    let sinc = if q.norm() < 1e-4 { 1.0 - q * q / 6.0 } else { q.sin() / q };
    (i * k).exp() * (q.cos() - i * k * sinc)
}

/// Bisection for a sign change of `f` on `[a, b]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    assert!(fa * f(b) <= 0.0, "no sign change on [{a}, {b}]");
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fa * fm <= 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// First sign change of `f` on a uniform scan of `[a, b]`.
pub fn bracket(f: &impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> Option<(f64, f64)> {
    let h = (b - a) / steps as f64;
    let mut prev = f(a);
    for s in 1..=steps {
        let x = a + h * s as f64;
        let cur = f(x);
        if prev * cur <= 0.0 {
            return Some((x - h, x));
        }
        prev = cur;
    }
    None
}
