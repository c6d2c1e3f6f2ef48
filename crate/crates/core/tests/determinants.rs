mod common;

use common::*;
use semisep::determinants::{fredholm_det_with, Tolerances};
use semisep::nystrom::{discretize, oracle_det};
use semisep::schrodinger::{build_halfline_kernel, Potential, Side, SpectralPoint};
use semisep::wienerhopf::RationalSymbolKernel;
use semisep::{
    fredholm_det, fredholm_det2, fundamental_solution, resolvent_kernel, trace_k, Complex64, Error, Grid, Interval,
    SemiSeparableKernel,
};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn rank_one() -> SemiSeparableKernel {
    SemiSeparableKernel::scalar(|_| ONE, |_| ONE, |_| ONE, |_| ONE, Interval::finite(0.0, 1.0).unwrap()).unwrap()
}

#[test]
fn trace_of_rank_one() {
    let t = trace_k(&rank_one(), &Grid::trapezoid(0.0, 1.0, 11).unwrap()).unwrap();
    assert!((t.trace_f1g1 - 1.0).norm() < 1e-14);
    assert!((t.trace_f2g2 - 1.0).norm() < 1e-14);
}

#[test]
fn trace_of_two_sided_exponential() {
    let k = RationalSymbolKernel::two_sided_exponential(1.0).unwrap().to_semiseparable().unwrap();
    let t = trace_k(&k, &Grid::trapezoid(0.0, 1.0, 101).unwrap()).unwrap();
    assert!((t.trace_f1g1 - 1.0).norm() < 1e-13);
    assert!((t.trace_f2g2 - 1.0).norm() < 1e-13);
}

#[test]
fn trace_of_halfline_kernel() {
    let pot = Potential::square_well(Side::HalfLine, c(-1.0, 0.0), 0.0, 1.0).unwrap();
    let zp = SpectralPoint::new(c(-1.0, 0.0)).unwrap();
    let kern = build_halfline_kernel(&pot, &zp).unwrap();
    let g = pot.grid(2000).unwrap();
    let t = trace_k(&kern, &g).unwrap();
    let nystrom = discretize(&kern, &g).unwrap().trace();
    assert!(rel(t.trace_f1g1, nystrom) < 1e-8);
    // -\int_0^1 G0(x, x) V dx with G0(x, x) = sin(kx) e^{ikx} / k = (e^{2ikx} - 1) / (2ik)
    let k = zp.sqrt_z();
    let i = Complex64::i();
    let integral = ((2.0 * i * k).exp() - 1.0) / (2.0 * i * k) - 1.0;
    let exact = integral / (2.0 * i * k);
    assert!(rel(t.trace_f1g1, exact) < 1e-6);
}

#[test]
fn det_at_zero_coupling() {
    let k = random_kernel(&mut rng(20), 2, 2, 1);
    let g = Grid::trapezoid(0.0, 1.0, 50).unwrap();
    let r = fredholm_det2(&k, ZERO, &g).unwrap();
    for v in [r.det_a, r.det_b, r.det2_a, r.det2_b] {
        assert_eq!(v, ONE);
    }
}

#[test]
fn det_of_rank_one() {
    let g = Grid::trapezoid(0.0, 1.0, 40).unwrap();
    for alpha in [c(0.5, 0.0), c(-2.0, 1.0), c(0.1, -0.7)] {
        let r = fredholm_det(&rank_one(), alpha, &g).unwrap();
        assert!((r.det_a - (1.0 - alpha)).norm() < 1e-13);
        assert!((r.det_b - (1.0 - alpha)).norm() < 1e-13);
    }
}

#[test]
fn volterra_kernels_have_unit_determinants() {
    let mut r = rng(21);
    let g = Grid::trapezoid(0.0, 1.0, 400).unwrap();
    for (n1, n2) in [(2, 0), (0, 3), (1, 0)] {
        let k = random_kernel(&mut r, 2, n1, n2);
        for _ in 0..5 {
            let alpha = random_in_unit_disk(&mut r);
            let rep = fredholm_det2(&k, alpha, &g).unwrap();
            let (det, det2) = if n2 == 0 { (rep.det_b, rep.det2_b) } else { (rep.det_a, rep.det2_a) };
            assert!((det - 1.0).norm() < 1e-12);
            assert!((det2 - 1.0).norm() < 1e-12);
        }
    }
}

#[test]
fn routes_agree_on_continuous_kernels() {
    let mut r = rng(22);
    let g = Grid::trapezoid(0.0, 1.0, 2000).unwrap();
    for m in [1, 2] {
        let k = random_continuous_kernel(&mut r, m, 2);
        let alpha = c(0.4, -0.3);
        let rep = fredholm_det(&k, alpha, &g).unwrap();
        assert!(rep.route_discrepancy < 1e-7, "discrepancy {}", rep.route_discrepancy);
        assert!(!rep.flagged);
        let t = trace_k(&k, &g).unwrap();
        assert!(t.difference() < 1e-7);
        let rep2 = fredholm_det2(&k, alpha, &g).unwrap();
        assert!(rel(rep2.det2_b, rep.det_b * (alpha * t.trace_f1g1).exp()) < 1e-7);
        assert!(rel(rep2.det2_a, rep.det_a * (alpha * t.trace_f1g1).exp()) < 1e-7);
    }
}

#[test]
fn det2_of_jump_kernel_agrees_across_routes() {
    let k = random_symbol(&mut rng(23), 2, 1, 1.0).to_semiseparable().unwrap();
    let rep = fredholm_det2(&k, ONE, &Grid::trapezoid(0.0, 1.0, 2000).unwrap()).unwrap();
    assert!(rep.route_discrepancy < 1e-7);
    assert!(rep.det_discrepancy > 1e-3);
}

#[test]
fn flagged_when_tolerance_is_tight() {
    let k = random_symbol(&mut rng(23), 2, 1, 1.0).to_semiseparable().unwrap();
    let tol = Tolerances { route: 1e-20, ..Tolerances::default() };
    let rep = fredholm_det_with(&k, ONE, &Grid::trapezoid(0.0, 1.0, 100).unwrap(), &tol).unwrap();
    assert!(rep.flagged);
}

#[test]
fn det_matches_oracle_for_halfline_well() {
    let pot = Potential::square_well(Side::HalfLine, c(-1.0, 0.0), 0.0, 1.0).unwrap();
    let zp = SpectralPoint::new(c(-1.0, 0.0)).unwrap();
    let kern = build_halfline_kernel(&pot, &zp).unwrap();
    let g = pot.grid(1500).unwrap();
    let route = fredholm_det(&kern, ONE, &g).unwrap().det_b;
    let oracle = oracle_det(&discretize(&kern, &g).unwrap(), ONE);
    assert!(rel(oracle, route) < 1e-4);
}

#[test]
fn resolvent_at_zero_coupling_is_kernel() {
    let k = random_kernel(&mut rng(24), 2, 1, 2);
    let g = Grid::trapezoid(0.0, 1.0, 64).unwrap();
    let fs = fundamental_solution(&k, ZERO, &g).unwrap();
    for (x, xp) in [(0.7, 0.2), (0.25, 0.8), (0.5, 0.1)] {
        let l = resolvent_kernel(&k, &fs, x, xp).unwrap();
        assert!(l.max_abs_diff(&k.eval_k(x, xp).unwrap()) < 1e-10);
    }
}

#[test]
fn resolvent_of_rank_one() {
    let g = Grid::trapezoid(0.0, 1.0, 64).unwrap();
    let alpha = c(0.3, 0.4);
    let fs = fundamental_solution(&rank_one(), alpha, &g).unwrap();
    for (x, xp) in [(0.7, 0.2), (0.25, 0.8), (0.05, 0.95)] {
        let l = resolvent_kernel(&rank_one(), &fs, x, xp).unwrap()[(0, 0)];
        assert!((l - 1.0 / (1.0 - alpha)).norm() < 1e-12);
    }
}

#[test]
fn resolvent_identity() {
    // (I + aL)(I - aK) = I  <=>  L - K - a \int L(x, t) K(t, y) dt = 0
    let k = random_continuous_kernel(&mut rng(25), 1, 1);
    let alpha = c(0.5, 0.2);
    let fs = fundamental_solution(&k, alpha, &Grid::trapezoid(0.0, 1.0, 2000).unwrap()).unwrap();
    let mut worst: f64 = 0.0;
    for (x, y) in [(0.3, 0.6), (0.8, 0.1), (0.45, 0.55)] {
        let t = Grid::trapezoid_with_breakpoints(0.0, 1.0, 2001, &[x, y]).unwrap();
        let prod: Vec<Complex64> = t
            .nodes()
            .iter()
            .map(|&s| resolvent_kernel(&k, &fs, x, s).unwrap()[(0, 0)] * k.eval_k(s, y).unwrap()[(0, 0)])
            .collect();
        let l = resolvent_kernel(&k, &fs, x, y).unwrap()[(0, 0)];
        let res = l - k.eval_k(x, y).unwrap()[(0, 0)] - alpha * t.integrate(&prod);
        worst = worst.max(res.norm());
    }
    assert!(worst < 1e-6, "residual {worst:e}");
}

#[test]
fn resolvent_pole() {
    let g = Grid::trapezoid(0.0, 1.0, 16).unwrap();
    let fs = fundamental_solution(&rank_one(), ONE, &g).unwrap();
    assert!(matches!(resolvent_kernel(&rank_one(), &fs, 0.3, 0.6), Err(Error::Pole(_))));
}
