mod common;

use common::*;
use semisep::floquet::{build_ktheta_kernel, FloquetParams, PeriodicPotential};
use semisep::nystrom::{discretize_with, oracle_det, oracle_det2, DiagonalRule, MAX_DIMENSION};
use semisep::schrodinger::{build_halfline_kernel, build_line_kernel, Potential, Side, SpectralPoint};
use semisep::wienerhopf::RationalSymbolKernel;
use semisep::{discretize, Complex64, Error, Grid, Interval, SemiSeparableKernel};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn rank_one() -> SemiSeparableKernel {
    SemiSeparableKernel::scalar(|x| c(1.0 + x, 0.0), |x| c(x.cos(), 0.0), |x| c(1.0 + x, 0.0), |x| c(x.cos(), 0.0), Interval::finite(0.0, 1.0).unwrap())
        .unwrap()
}

#[test]
fn rank_one_matrix_has_rank_one() {
    for g in [Grid::trapezoid(0.0, 1.0, 37).unwrap(), Grid::trapezoid(0.0, 1.0, 200).unwrap()] {
        let sv = discretize(&rank_one(), &g).unwrap().singular_values().unwrap();
        assert!(sv[0] > 0.1);
        assert!(sv[1] < 1e-12 * sv[0]);
    }
}

#[test]
fn symmetric_kernel_gives_symmetric_matrix() {
    let k = RationalSymbolKernel::two_sided_exponential(1.5).unwrap().to_semiseparable().unwrap();
    let d = discretize(&k, &Grid::trapezoid(0.0, 1.5, 60).unwrap()).unwrap();
    for r in 0..d.dim() {
        for col in 0..d.dim() {
            assert!((d.entry(r, col) - d.entry(col, r)).norm() < 1e-14);
        }
    }
}

#[test]
fn two_sided_exponential_entries() {
    let k = RationalSymbolKernel::two_sided_exponential(1.0).unwrap().to_semiseparable().unwrap();
    let g = Grid::trapezoid(0.0, 1.0, 21).unwrap();
    let d = discretize(&k, &g).unwrap();
    let (x, w) = (g.nodes(), g.weights());
    for (i, j) in [(0, 5), (13, 2), (20, 20)] {
        let expected = (-(x[i] - x[j]).abs()).exp() * (w[i] * w[j]).sqrt();
        assert!((d.entry(i, j) - expected).norm() < 1e-14);
    }
}

#[test]
fn block_dimension_and_guard() {
    let line = Potential::square_well(Side::Line, c(-1.0, 0.0), -1.0, 1.0).unwrap();
    let zp = SpectralPoint::new(c(-1.0, 0.0)).unwrap();
    let sys = semisep::schrodinger::build_system_kernel(&line, &zp).unwrap();
    let g = line.grid(100).unwrap();
    assert_eq!(discretize(&sys, &g).unwrap().dim(), 2 * g.len());
    let big = line.grid(MAX_DIMENSION / 2 + 1).unwrap();
    assert!(matches!(discretize(&sys, &big), Err(Error::SizeLimit(_, MAX_DIMENSION))));
}

#[test]
fn oracle_at_zero_coupling() {
    let d = discretize(&rank_one(), &Grid::trapezoid(0.0, 1.0, 30).unwrap()).unwrap();
    assert_eq!(oracle_det(&d, ZERO), ONE);
    assert_eq!(oracle_det2(&d, ZERO), ONE);
}

#[test]
fn oracle_rank_one() {
    // det(I - aK) = 1 - a \int (1 + x) cos x dx = 1 - a (2 sin 1 + cos 1 - 1)
    let tr = 2.0 * 1f64.sin() + 1f64.cos() - 1.0;
    let d = discretize(&rank_one(), &Grid::trapezoid(0.0, 1.0, 800).unwrap()).unwrap();
    for alpha in [c(0.5, 0.0), c(-0.3, 0.8)] {
        assert!((oracle_det(&d, alpha) - (1.0 - alpha * tr)).norm() < 1e-6);
    }
}

#[test]
fn oracle_det2_over_det_is_exp_trace() {
    let k = random_kernel(&mut rng(30), 2, 1, 2);
    let d = discretize(&k, &Grid::trapezoid(0.0, 1.0, 100).unwrap()).unwrap();
    let alpha = c(0.3, 0.1);
    let ratio = oracle_det2(&d, alpha) / oracle_det(&d, alpha);
    assert!((ratio - (alpha * d.trace()).exp()).norm() < 1e-12);
}

#[test]
fn oracle_det2_of_two_sided_exponential_tends_to_cos() {
    let k = RationalSymbolKernel::two_sided_exponential(1.0).unwrap().to_semiseparable().unwrap();
    let err: Vec<f64> = [250, 500, 1000]
        .iter()
        .map(|&n| {
            let d = discretize_with(&k, &Grid::trapezoid(0.0, 1.0, n).unwrap(), DiagonalRule::Average).unwrap();
            (oracle_det2(&d, ONE) - 1f64.cos()).norm()
        })
        .collect();
    assert!(err[2] < 1e-4, "errors {err:?}");
    assert!(err[0] > err[1] && err[1] > err[2]);
}

#[test]
fn refinement_differences_decrease() {
    let half = Potential::square_well(Side::HalfLine, c(-1.0, 0.0), 0.0, 1.0).unwrap();
    let line = Potential::square_well(Side::Line, c(-2.0, 0.0), -1.0, 1.0).unwrap();
    let zp = SpectralPoint::new(c(-1.0, 0.0)).unwrap();
    let per = PeriodicPotential::cosine(ZERO, ONE, 1.0).unwrap();
    let fp = FloquetParams::new(SpectralPoint::new(c(-2.0, 0.0)).unwrap(), 1.0, 1.0).unwrap();
    let wh = random_symbol(&mut rng(31), 2, 1, 1.0);
    let cases: Vec<(SemiSeparableKernel, Box<dyn Fn(usize) -> Grid>, bool)> = vec![
        (build_halfline_kernel(&half, &zp).unwrap(), Box::new(move |n| half.grid(n).unwrap()), false),
        (build_line_kernel(&line, &zp).unwrap(), Box::new(move |n| line.grid(n).unwrap()), false),
        (build_ktheta_kernel(&per, &fp).unwrap(), Box::new(move |n| per.grid(n).unwrap()), false),
        (wh.to_semiseparable().unwrap(), Box::new(|n| Grid::trapezoid(0.0, 1.0, n).unwrap()), true),
    ];
    for (kern, grid, jump) in cases {
        let value = |n: usize| {
            let rule = if jump { DiagonalRule::Average } else { DiagonalRule::Lower };
            let d = discretize_with(&kern, &grid(n), rule).unwrap();
            if jump {
                oracle_det2(&d, ONE)
            } else {
                oracle_det(&d, ONE)
            }
        };
        let v: Vec<Complex64> = [200, 400, 800, 1600].iter().map(|&n| value(n)).collect();
        let diffs: Vec<f64> = v.windows(2).map(|w| (w[0] - w[1]).norm()).collect();
        assert!(diffs.windows(2).all(|w| w[1] < w[0]), "differences {diffs:?}");
    }
}

#[test]
fn continuous_symbol_plain_determinant() {
    // e^{-|t|} is continuous at 0, so det(I - K) = det_2(I - K) e^{-tau k(0)} = cos(tau) e^{-tau}
    for tau in [0.5, 1.0, 2.0] {
        let k = RationalSymbolKernel::two_sided_exponential(tau).unwrap();
        assert!(k.is_continuous());
        let d = discretize(&k.to_semiseparable().unwrap(), &Grid::trapezoid(0.0, tau, 1000).unwrap()).unwrap();
        assert!((oracle_det(&d, ONE) - tau.cos() * (-tau).exp()).norm() < 1e-3);
    }
}
