//! Fixed-step RK4 for `-y'' + V y = z y`, written as `Y' = [[0, 1], [V - z, 0]] Y`.
//!
//! Potentials may jump at known breakpoints; integration is split there and
//! `V` is only ever sampled strictly inside a smooth piece.

use num_complex::Complex64;

pub type State = [Complex64; 2];

fn rhs(q: Complex64, y: &State) -> State {
    [y[1], q * y[0]]
}

fn axpy(y: &State, h: f64, k: &State) -> State {
    [y[0] + k[0] * h, y[1] + k[1] * h]
}

/// Integrates `(y, y')` from `x0` to `x1` (either direction) with
/// `steps` equal RK4 steps on a single smooth piece.
fn rk4_piece(v: &dyn Fn(f64) -> Complex64, z: Complex64, x0: f64, x1: f64, y0: State, steps: usize) -> State {
    let steps = steps.max(1);
    let h = (x1 - x0) / steps as f64;
    let (lo, hi) = if x0 < x1 { (x0, x1) } else { (x1, x0) };
    let nudge = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    let q = |x: f64| v(x.clamp(lo + nudge, hi - nudge)) - z;
    let mut y = y0;
    for s in 0..steps {
        let x = x0 + h * s as f64;
        let qa = q(x);
        let qm = q(x + 0.5 * h);
        let qb = q(x + h);
        let k1 = rhs(qa, &y);
        let k2 = rhs(qm, &axpy(&y, 0.5 * h, &k1));
        let k3 = rhs(qm, &axpy(&y, 0.5 * h, &k2));
        let k4 = rhs(qb, &axpy(&y, h, &k3));
        y = [
            y[0] + (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) * (h / 6.0),
            y[1] + (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) * (h / 6.0),
        ];
    }
    y
}

/// Propagates `(y, y')` from `x0` to `x1` with roughly `step` spacing,
/// restarting at every breakpoint between the two points.
pub fn propagate(
    v: &dyn Fn(f64) -> Complex64,
    z: Complex64,
    x0: f64,
    x1: f64,
    y0: State,
    step: f64,
    breakpoints: &[f64],
) -> State {
    if x0 == x1 {
        return y0;
    }
    let (lo, hi) = if x0 < x1 { (x0, x1) } else { (x1, x0) };
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&p| p > lo && p < hi).collect();
    cuts.sort_by(f64::total_cmp);
    if x0 > x1 {
        cuts.reverse();
    }
    let mut pts = vec![x0];
    pts.extend(cuts);
    pts.push(x1);
    let mut y = y0;
    for w in pts.windows(2) {
        let steps = ((w[1] - w[0]).abs() / step).ceil() as usize;
        y = rk4_piece(v, z, w[0], w[1], y, steps);
    }
    y
}

/// Transfer matrix `Phi` with columns the solutions starting from `(1, 0)`
/// and `(0, 1)` at `x0`, evaluated at `x1`.
pub fn transfer_matrix(
    v: &dyn Fn(f64) -> Complex64,
    z: Complex64,
    x0: f64,
    x1: f64,
    step: f64,
    breakpoints: &[f64],
) -> [[Complex64; 2]; 2] {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let c = propagate(v, z, x0, x1, [one, zero], step, breakpoints);
    let s = propagate(v, z, x0, x1, [zero, one], step, breakpoints);
    [[c[0], s[0]], [c[1], s[1]]]
}
