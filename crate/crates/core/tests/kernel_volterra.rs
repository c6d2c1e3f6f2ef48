mod common;

use std::f64::consts::PI;

use common::*;
use semisep::schrodinger::{build_halfline_kernel, build_line_kernel, regular_solution_halfline, Potential, Side, SpectralPoint};
use semisep::volterra::{fundamental_solution_sampled, volterra_resolvent_check};
use semisep::wienerhopf::RationalSymbolKernel;
use semisep::{
    fundamental_solution, solve_fhat1, solve_fhat2, Complex64, ComplexMatrix, Error, Grid, Interval, SemiSeparableKernel,
};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

fn constant(v: Complex64) -> impl Fn(f64) -> Complex64 + Send + Sync + 'static {
    move |_| v
}

fn unit_interval() -> Interval {
    Interval::finite(0.0, 1.0).unwrap()
}

#[test]
fn eval_k_constant_kernel() {
    let k = SemiSeparableKernel::scalar(constant(ONE), constant(ONE), constant(ONE), constant(ONE), unit_interval()).unwrap();
    assert_eq!(k.eval_k(0.7, 0.3).unwrap()[(0, 0)], ONE);
}

#[test]
fn eval_k_exponential_product() {
    let i = Complex64::i();
    let k = SemiSeparableKernel::scalar(
        move |x| (i * x).exp(),
        move |x| (-i * x).exp(),
        constant(ONE),
        constant(ONE),
        Interval::finite(0.0, 2.0).unwrap(),
    )
    .unwrap();
    let v = k.eval_k(1.0, 0.0).unwrap()[(0, 0)];
    assert!((v - i.exp()).norm() < 1e-15);
}

#[test]
fn eval_k_halfline_at_minus_one() {
    let pot = Potential::half_line(constant(c(-1.0, 0.0)), 3.0).unwrap();
    let zp = SpectralPoint::new(c(-1.0, 0.0)).unwrap();
    let k = build_halfline_kernel(&pot, &zp).unwrap();
    let expected = -pot.u(2.0) * 1f64.sinh() * (-2f64).exp() * pot.v(1.0);
    assert!((k.eval_k(2.0, 1.0).unwrap()[(0, 0)] - expected).norm() < 1e-14);
}

#[test]
fn eval_k_rejects_points_outside() {
    let k = SemiSeparableKernel::scalar(constant(ONE), constant(ONE), constant(ONE), constant(ONE), unit_interval()).unwrap();
    assert!(matches!(k.eval_k(1.5, 0.3), Err(Error::Domain { .. })));
    assert!(matches!(k.eval_h(0.5, -0.1), Err(Error::Domain { .. })));
    assert!(matches!(k.eval_a(2.0), Err(Error::Domain { .. })));
}

#[test]
fn eval_k_diagonal_is_lower_limit() {
    let k = SemiSeparableKernel::scalar(constant(c(2.0, 0.0)), constant(ONE), constant(c(5.0, 0.0)), constant(ONE), unit_interval()).unwrap();
    assert_eq!(k.eval_k(0.4, 0.4).unwrap()[(0, 0)], c(2.0, 0.0));
    assert_eq!(k.eval_k(0.3, 0.4).unwrap()[(0, 0)], c(5.0, 0.0));
}

#[test]
fn eval_h_cancels_for_equal_factors() {
    let k = random_kernel(&mut rng(3), 2, 2, 2);
    let same = SemiSeparableKernel::new(
        2,
        2,
        2,
        {
            let k = k.clone();
            move |x| k.f1(x).unwrap()
        },
        {
            let k = k.clone();
            move |x| k.g1(x).unwrap()
        },
        {
            let k = k.clone();
            move |x| k.f1(x).unwrap()
        },
        {
            let k = k.clone();
            move |x| k.g1(x).unwrap()
        },
        unit_interval(),
    )
    .unwrap();
    assert_eq!(same.eval_h(0.8, 0.1).unwrap().max_abs(), 0.0);
}

#[test]
fn eval_h_two_sided_exponential() {
    let k = RationalSymbolKernel::two_sided_exponential(1.0).unwrap().to_semiseparable().unwrap();
    for (x, xp) in [(0.7f64, 0.2f64), (0.1, 0.9), (0.5, 0.5)] {
        let expected = (-(x - xp)).exp() - (x - xp).exp();
        assert!((k.eval_h(x, xp).unwrap()[(0, 0)] - expected).norm() < 1e-14);
    }
}

#[test]
fn eval_h_halfline_quarter_period() {
    let pot = Potential::half_line(|x| c(-1.0 - x, 0.3), 3.0).unwrap();
    let zp = SpectralPoint::new(ONE).unwrap();
    let k = build_halfline_kernel(&pot, &zp).unwrap();
    let (x, xp) = (2.0, 2.0 - PI / 2.0);
    let expected = pot.u(x) * pot.v(xp);
    assert!((k.eval_h(x, xp).unwrap()[(0, 0)] - expected).norm() < 1e-14);
}

#[test]
fn eval_a_block_structure() {
    let mut r = rng(5);
    let k = random_kernel(&mut r, 2, 3, 2);
    for i in 0..10 {
        let x = 0.05 + 0.09 * i as f64;
        let a = k.eval_a(x).unwrap();
        assert_eq!(a.shape(), (5, 5));
        let bc = &k.eval_b(x).unwrap() * &k.eval_c(x).unwrap();
        assert!(a.max_abs_diff(&bc) < 1e-14);
        let (f1, g1, f2, g2) = (k.f1(x).unwrap(), k.g1(x).unwrap(), k.f2(x).unwrap(), k.g2(x).unwrap());
        let tr = (&g1 * &f1).trace() - (&g2 * &f2).trace();
        assert!((a.trace() - tr).norm() < 1e-13);
    }
}

#[test]
fn eval_a_line_kernel_is_traceless() {
    let pot = Potential::line(|x| c((3.0 * x).cos(), 0.2 * x), -1.0, 1.0).unwrap();
    let zp = SpectralPoint::new(c(2.0, 0.7)).unwrap();
    let k = build_line_kernel(&pot, &zp).unwrap();
    let s = zp.sqrt_z();
    let i = Complex64::i();
    for x in [-0.8, -0.1, 0.35, 0.9] {
        let a = k.eval_a(x).unwrap();
        let pre = -i / (2.0 * s) * pot.value(x);
        let e = (2.0 * i * s * x).exp();
        let expected = ComplexMatrix::from_rows(&[&[pre, pre / e], &[-pre * e, -pre]]);
        assert!(a.max_abs_diff(&expected) < 1e-13);
        assert!(a.trace().norm() < 1e-14);
    }
}

#[test]
fn kernel_rejects_wrong_shapes() {
    let bad = SemiSeparableKernel::new(
        2,
        1,
        1,
        |_| ComplexMatrix::zeros(2, 1),
        |_| ComplexMatrix::zeros(1, 2),
        |_| ComplexMatrix::zeros(2, 2),
        |_| ComplexMatrix::zeros(1, 2),
        unit_interval(),
    );
    let err = match bad {
        Ok(k) => k.sample(&Grid::trapezoid(0.0, 1.0, 5).unwrap()).map(|_| ()),
        Err(e) => Err(e),
    };
    assert!(matches!(err, Err(Error::Shape { .. })));
}

#[test]
fn grid_weights_sum_to_length() {
    for (g, length) in [
        (Grid::trapezoid(-0.3, 2.1, 17).unwrap(), 2.4),
        (Grid::trapezoid_with_breakpoints(0.0, 3.0, 40, &[0.7, 1.9]).unwrap(), 3.0),
        (Grid::gauss_legendre(0.0, 3.0, 5, 6).unwrap(), 3.0),
    ] {
        let sum: f64 = g.weights().iter().sum();
        assert!((sum - length).abs() < 1e-12 * length);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        assert!(g.weights().iter().all(|&w| w > 0.0));
    }
}

#[test]
fn fhat_at_zero_coupling_is_f() {
    let k = random_kernel(&mut rng(7), 2, 1, 2);
    let g = Grid::trapezoid(0.0, 1.0, 50).unwrap();
    let s1 = solve_fhat1(&k, Complex64::new(0.0, 0.0), &g).unwrap();
    let s2 = solve_fhat2(&k, Complex64::new(0.0, 0.0), &g).unwrap();
    for (i, &x) in g.nodes().iter().enumerate() {
        assert!(s1.fhat[i].max_abs_diff(&k.f1(x).unwrap()) < 1e-15);
        assert!(s2.fhat[i].max_abs_diff(&k.f2(x).unwrap()) < 1e-15);
    }
}

/// `H = f1 g1 - f2 g2 = 2 - 1 = 1`.
fn unit_h_kernel() -> SemiSeparableKernel {
    SemiSeparableKernel::scalar(constant(ONE), constant(c(2.0, 0.0)), constant(ONE), constant(ONE), unit_interval()).unwrap()
}

#[test]
fn fhat2_exponential_growth() {
    let alpha = c(0.8, -0.3);
    let g = Grid::trapezoid(0.0, 1.0, 2001).unwrap();
    let s = solve_fhat2(&unit_h_kernel(), alpha, &g).unwrap();
    for (i, &x) in g.nodes().iter().enumerate() {
        assert!((s.fhat[i][(0, 0)] - (alpha * x).exp()).norm() < 1e-7);
    }
}

#[test]
fn fhat1_exponential_from_the_right() {
    // fhat1 = 1 - alpha \int_x^1 fhat1 gives fhat1' = alpha fhat1, fhat1(1) = 1
    let alpha = c(0.8, -0.3);
    let g = Grid::trapezoid(0.0, 1.0, 2001).unwrap();
    let s = solve_fhat1(&unit_h_kernel(), alpha, &g).unwrap();
    for (i, &x) in g.nodes().iter().enumerate() {
        assert!((s.fhat[i][(0, 0)] - (-alpha * (1.0 - x)).exp()).norm() < 1e-7);
    }
}

#[test]
fn fhat_endpoint_values() {
    let k = random_kernel(&mut rng(8), 2, 2, 1);
    let g = Grid::trapezoid(0.0, 1.0, 100).unwrap();
    let alpha = c(0.4, 0.9);
    let s1 = solve_fhat1(&k, alpha, &g).unwrap();
    let s2 = solve_fhat2(&k, alpha, &g).unwrap();
    assert_eq!(s1.fhat[g.len() - 1], k.f1(1.0).unwrap());
    assert_eq!(s2.fhat[0], k.f2(0.0).unwrap());
}

#[test]
fn fhat2_is_regular_solution() {
    let pot = Potential::square_well(Side::HalfLine, c(-1.0, 0.0), 0.0, 1.0).unwrap();
    let zp = SpectralPoint::new(c(-1.0, 0.0)).unwrap();
    let g = pot.grid(1200).unwrap();
    let s2 = solve_fhat2(&build_halfline_kernel(&pot, &zp).unwrap(), ONE, &g).unwrap();
    let phi = regular_solution_halfline(&pot, &zp, &g).unwrap();
    for (i, &x) in g.nodes().iter().enumerate() {
        let u = pot.u(x);
        assert!((s2.fhat[i][(0, 0)] + u * phi.values[i]).norm() < 1e-10);
    }
    // phi(0) = 0, phi'(0) = 1 by a one-sided difference
    let x = g.nodes();
    assert!(phi.values[0].norm() < 1e-15);
    let d = (-3.0 * phi.values[0] + 4.0 * phi.values[1] - phi.values[2]) / (2.0 * (x[1] - x[0]));
    assert!((d - 1.0).norm() < 1e-5);
}

#[test]
fn fundamental_solution_at_zero_coupling_is_identity() {
    let k = random_kernel(&mut rng(9), 2, 2, 1);
    let g = Grid::trapezoid(0.0, 1.0, 30).unwrap();
    let fs = fundamental_solution(&k, Complex64::new(0.0, 0.0), &g).unwrap();
    for u in &fs.u {
        assert_eq!(u.max_abs_diff(&ComplexMatrix::identity(3)), 0.0);
    }
}

#[test]
fn fundamental_solution_endpoint_blocks() {
    let k = random_kernel(&mut rng(10), 2, 2, 3);
    let g = Grid::trapezoid(0.0, 1.0, 200).unwrap();
    let fs = fundamental_solution(&k, c(0.7, -0.4), &g).unwrap();
    let last = g.len() - 1;
    assert_eq!(fs.u11(last), ComplexMatrix::identity(2));
    assert_eq!(fs.u21(last).max_abs(), 0.0);
    assert_eq!(fs.u22(0), ComplexMatrix::identity(3));
    assert_eq!(fs.u12(0).max_abs(), 0.0);
}

#[test]
fn fundamental_solution_ode_residual_is_second_order() {
    let k = random_kernel(&mut rng(11), 1, 1, 2);
    let alpha = c(0.6, 0.2);
    let res: Vec<f64> = [100, 200, 400, 800]
        .iter()
        .map(|&n| {
            let g = Grid::trapezoid(0.0, 1.0, n).unwrap();
            let s = k.sample(&g).unwrap();
            fundamental_solution_sampled(&s, alpha).unwrap().ode_residual(&s)
        })
        .collect();
    for w in res.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.9, "residuals {res:?}");
    }
}

#[test]
fn fundamental_solution_liouville() {
    let k = random_kernel(&mut rng(12), 2, 2, 1);
    let alpha = c(0.5, 0.5);
    let res: Vec<f64> = [500, 1000, 2000]
        .iter()
        .map(|&n| {
            let g = Grid::trapezoid(0.0, 1.0, n).unwrap();
            let s = k.sample(&g).unwrap();
            let fs = fundamental_solution_sampled(&s, alpha).unwrap();
            assert!(fs.discrete_liouville_residual(&s) < 1e-12);
            fs.liouville_residual(&s)
        })
        .collect();
    for w in res.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.9, "residuals {res:?}");
    }
}

#[test]
fn fundamental_solution_liouville_traceless() {
    let pot = Potential::line(|x| c(-2.0 + x * x, 0.5 * x), -1.0, 1.0).unwrap();
    let zp = SpectralPoint::new(c(1.5, 0.5)).unwrap();
    let g = pot.grid(2000).unwrap();
    let s = build_line_kernel(&pot, &zp).unwrap().sample(&g).unwrap();
    let fs = fundamental_solution_sampled(&s, ONE).unwrap();
    assert!(fs.liouville_residual(&s) < 1e-8);
}

#[test]
fn det_u_is_analytic_in_alpha() {
    let k = random_kernel(&mut rng(13), 1, 2, 1);
    let g = Grid::trapezoid(0.0, 1.0, 300).unwrap();
    let d = |a: Complex64| fundamental_solution(&k, a, &g).unwrap().det_b();
    let a0 = c(0.3, -0.2);
    let eps = 1e-4;
    let along_re = (d(a0 + eps) - d(a0 - eps)) / (2.0 * eps);
    let along_im = (d(a0 + c(0.0, eps)) - d(a0 - c(0.0, eps))) / c(0.0, 2.0 * eps);
    assert!((along_re - along_im).norm() < 1e-6 * along_re.norm().max(1.0));
}

#[test]
fn resolvent_check_zero_coupling() {
    let k = random_kernel(&mut rng(14), 1, 1, 1);
    let g = Grid::trapezoid(0.0, 1.0, 40).unwrap();
    assert_eq!(volterra_resolvent_check(&k, Complex64::new(0.0, 0.0), &g).unwrap(), 0.0);
}

#[test]
fn resolvent_check_random_scalar() {
    let k = random_kernel(&mut rng(15), 1, 1, 1);
    let res: Vec<f64> = [100, 200, 400]
        .iter()
        .map(|&n| volterra_resolvent_check(&k, c(0.4, 0.2), &Grid::trapezoid(0.0, 1.0, n).unwrap()).unwrap())
        .collect();
    assert!(res[2] < 1e-6, "residuals {res:?}");
    for w in res.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.9, "residuals {res:?}");
    }
}

#[test]
fn resolvent_check_halfline() {
    let pot = Potential::square_well(Side::HalfLine, c(-1.0, 0.0), 0.0, 1.0).unwrap();
    let zp = SpectralPoint::new(c(-1.0, 0.0)).unwrap();
    let g = pot.grid(400).unwrap();
    assert!(volterra_resolvent_check(&build_halfline_kernel(&pot, &zp).unwrap(), ONE, &g).unwrap() < 1e-6);
}
