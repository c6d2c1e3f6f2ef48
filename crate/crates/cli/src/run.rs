//! Sweep execution and CSV rows.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use semisep::floquet::{build_ktheta_kernel, det_ktheta_with, FloquetParams, PeriodicPotential};
use semisep::schrodinger::{
    build_halfline_kernel, build_line_kernel, build_system_kernel, first_order_system_det2_with, jost_function_halfline_with,
    jost_function_line_with, Potential, Side, SpectralPoint,
};
use semisep::wienerhopf::{wiener_hopf_det2, RationalSymbolKernel};
use semisep::{
    discretize, discretize_with, fredholm_det2_with, fredholm_det_with, oracle_det, oracle_det2, Complex64,
    DeterminantReport, DiagonalRule, Grid, Quantity, SemiSeparableKernel, Tolerances,
};

use crate::config::{format_complex, Mode, PotentialSpec, RunConfig, SymbolSpec};

pub const HEADER: [&str; 17] = [
    "mode",
    "z",
    "theta",
    "tau",
    "coupling",
    "det_a",
    "det_b",
    "det2_a",
    "det2_b",
    "closed_form",
    "route_discrepancy",
    "closed_form_discrepancy",
    "oracle_value",
    "oracle_discrepancy",
    "flagged",
    "grid_n",
    "wall_time_ms",
];

/// One sweep point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point {
    pub z: Option<Complex64>,
    pub theta: Option<f64>,
    pub tau: Option<f64>,
    pub coupling: Option<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub mode: Mode,
    pub point: Point,
    pub det_a: Complex64,
    pub det_b: Complex64,
    pub det2_a: Complex64,
    pub det2_b: Complex64,
    pub closed_form: Option<Complex64>,
    pub route_discrepancy: f64,
    pub closed_form_discrepancy: Option<f64>,
    pub oracle_value: Option<Complex64>,
    pub oracle_discrepancy: Option<f64>,
    pub flagged: bool,
    pub grid_n: usize,
    pub wall_time_ms: f64,
}

impl Row {
    pub fn record(&self) -> Vec<String> {
        let c = |z: Option<Complex64>| z.map(format_complex).unwrap_or_default();
        let r = |x: Option<f64>| x.map(|v| format!("{v:.15e}")).unwrap_or_default();
        vec![
            self.mode.name().to_string(),
            c(self.point.z),
            r(self.point.theta),
            r(self.point.tau),
            c(self.point.coupling),
            format_complex(self.det_a),
            format_complex(self.det_b),
            format_complex(self.det2_a),
            format_complex(self.det2_b),
            c(self.closed_form),
            format!("{:.6e}", self.route_discrepancy),
            self.closed_form_discrepancy.map(|v| format!("{v:.6e}")).unwrap_or_default(),
            c(self.oracle_value),
            self.oracle_discrepancy.map(|v| format!("{v:.6e}")).unwrap_or_default(),
            self.flagged.to_string(),
            self.grid_n.to_string(),
            format!("{:.3}", self.wall_time_ms),
        ]
    }
}

#[derive(Debug, thiserror::Error)]
#[error("sweep point {index} ({point}): {source}")]
pub struct PointError {
    pub index: usize,
    pub point: String,
    pub source: semisep::Error,
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(1.0)
}

pub fn points(cfg: &RunConfig) -> Vec<Point> {
    match cfg.mode {
        Mode::JostHalfline | Mode::TransmissionLine | Mode::System2x2 => {
            cfg.z.iter().map(|&z| Point { z: Some(z), ..Point::default() }).collect()
        }
        Mode::Floquet => cfg
            .z
            .iter()
            .flat_map(|&z| cfg.theta.iter().map(move |&t| Point { z: Some(z), theta: Some(t), ..Point::default() }))
            .collect(),
        Mode::WienerHopf | Mode::Det | Mode::OracleCompare => cfg
            .tau
            .iter()
            .flat_map(|&tau| {
                cfg.coupling
                    .iter()
                    .map(move |&a| Point { tau: Some(tau), coupling: Some(a), ..Point::default() })
            })
            .collect(),
    }
}

fn describe(p: &Point) -> String {
    let mut parts = Vec::new();
    if let Some(z) = p.z {
        parts.push(format!("z={}", format_complex(z)));
    }
    if let Some(t) = p.theta {
        parts.push(format!("theta={t}"));
    }
    if let Some(t) = p.tau {
        parts.push(format!("tau={t}"));
    }
    if let Some(a) = p.coupling {
        parts.push(format!("coupling={}", format_complex(a)));
    }
    parts.join(" ")
}

fn schrodinger_potential(spec: &PotentialSpec, side: Side) -> semisep::Result<Potential> {
    let zero = Complex64::new(0.0, 0.0);
    match spec {
        PotentialSpec::Zero => match side {
            Side::HalfLine => Potential::square_well(side, zero, 0.0, 1.0),
            Side::Line => Potential::square_well(side, zero, -1.0, 1.0),
        },
        &PotentialSpec::SquareWell { depth, lo, hi } => Potential::square_well(side, depth, lo, hi),
        &PotentialSpec::Exponential { depth, decay, truncation } => {
            let v = move |x: f64| depth * (-decay * x.abs()).exp();
            match side {
                Side::HalfLine => Potential::half_line(v, truncation),
                Side::Line => Potential::line(v, -truncation, truncation),
            }
        }
        PotentialSpec::Tabulated { xs, vs } => Potential::tabulated(side, xs.clone(), vs.clone()),
        _ => Err(semisep::Error::InvalidParameter("periodic potential in a scattering mode".into())),
    }
}

fn periodic_potential(spec: &PotentialSpec, period: f64) -> semisep::Result<PeriodicPotential> {
    let zero = Complex64::new(0.0, 0.0);
    match spec {
        PotentialSpec::Zero => PeriodicPotential::new(move |_| zero, period),
        &PotentialSpec::Cosine { a0, a1 } => PeriodicPotential::cosine(a0, a1, period),
        &PotentialSpec::KronigPenney { depth, width } => PeriodicPotential::kronig_penney(depth, width, period),
        PotentialSpec::Tabulated { xs, vs } => {
            let (xs, vs) = (xs.clone(), vs.clone());
            if xs.len() < 2 || xs.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(semisep::Error::InvalidParameter("tabulated abscissae must be increasing".into()));
            }
            PeriodicPotential::new(
                move |x| {
                    let x = x.rem_euclid(period);
                    if x <= xs[0] {
                        return vs[0];
                    }
                    if x >= xs[xs.len() - 1] {
                        return vs[vs.len() - 1];
                    }
                    let j = xs.partition_point(|&p| p <= x).clamp(1, xs.len() - 1);
                    let s = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
                    vs[j - 1] * (1.0 - s) + vs[j] * s
                },
                period,
            )
        }
        _ => Err(semisep::Error::InvalidParameter("scattering potential in floquet mode".into())),
    }
}

fn symbol_kernel(spec: &SymbolSpec, coupling: Complex64, tau: f64) -> semisep::Result<RationalSymbolKernel> {
    let scale = |v: &[Complex64]| v.iter().map(|a| a * coupling).collect::<Vec<_>>();
    RationalSymbolKernel::new(scale(&spec.alphas), spec.lambdas.clone(), scale(&spec.betas), spec.mus.clone(), tau)
}

/// Dense Nystrom value of the same quantity the report was computed for.
fn oracle(kern: &SemiSeparableKernel, grid: &Grid, alpha: Complex64, quantity: Quantity) -> semisep::Result<Complex64> {
    Ok(match quantity {
        Quantity::Det => oracle_det(&discretize(kern, grid)?, alpha),
        Quantity::Det2 => oracle_det2(&discretize_with(kern, grid, DiagonalRule::Average)?, alpha),
    })
}

struct Outcome {
    det: DeterminantReport,
    closed_form: Option<(Complex64, f64)>,
    oracle: Option<Complex64>,
    internal_flag: bool,
}

fn evaluate(cfg: &RunConfig, p: &Point) -> semisep::Result<Outcome> {
    let tol = Tolerances { route: cfg.route_tol, oracle: cfg.oracle_tol, ..Tolerances::default() };
    let one = Complex64::new(1.0, 0.0);
    let n = cfg.grid_n;
    let pot_spec = cfg.potential.as_ref();
    match cfg.mode {
        Mode::JostHalfline => {
            let pot = schrodinger_potential(pot_spec.expect("validated"), Side::HalfLine)?;
            let zp = SpectralPoint::new(p.z.expect("z point"))?;
            let grid = pot.grid(n)?;
            let rep = jost_function_halfline_with(&pot, &zp, &grid, &tol)?;
            let oracle = cfg.oracle.then(|| oracle(&build_halfline_kernel(&pot, &zp)?, &grid, one, Quantity::Det)).transpose()?;
            Ok(Outcome {
                closed_form: Some((rep.jost, rel(rep.det.det_b, rep.jost))),
                internal_flag: rep.flagged,
                det: rep.det,
                oracle,
            })
        }
        Mode::TransmissionLine => {
            let pot = schrodinger_potential(pot_spec.expect("validated"), Side::Line)?;
            let zp = SpectralPoint::new(p.z.expect("z point"))?;
            let grid = pot.grid(n)?;
            let rep = jost_function_line_with(&pot, &zp, &grid, &tol)?;
            let oracle = cfg.oracle.then(|| oracle(&build_line_kernel(&pot, &zp)?, &grid, one, Quantity::Det)).transpose()?;
            Ok(Outcome {
                closed_form: Some((rep.value(), rel(rep.det.det_b, rep.value()))),
                internal_flag: rep.flagged,
                det: rep.det,
                oracle,
            })
        }
        Mode::System2x2 => {
            let pot = schrodinger_potential(pot_spec.expect("validated"), Side::Line)?;
            let zp = SpectralPoint::new(p.z.expect("z point"))?;
            let grid = pot.grid(n)?;
            let rep = first_order_system_det2_with(&pot, &zp, &grid, &tol)?;
            let oracle = cfg.oracle.then(|| oracle(&build_system_kernel(&pot, &zp)?, &grid, one, Quantity::Det2)).transpose()?;
            Ok(Outcome {
                closed_form: Some((rep.jost_times_exp, rep.jost_residual)),
                internal_flag: rep.flagged,
                det: rep.system,
                oracle,
            })
        }
        Mode::Floquet => {
            let pot = periodic_potential(pot_spec.expect("validated"), cfg.period)?;
            let zp = SpectralPoint::new(p.z.expect("z point"))?;
            let theta = p.theta.expect("theta point");
            let grid = pot.grid(n)?;
            let rep = det_ktheta_with(&pot, &zp, theta, &grid, &tol, None)?;
            let oracle = cfg
                .oracle
                .then(|| {
                    let fp = FloquetParams::new(zp, theta, cfg.period)?;
                    oracle(&build_ktheta_kernel(&pot, &fp)?, &grid, one, Quantity::Det)
                })
                .transpose()?;
            Ok(Outcome {
                closed_form: Some((rep.monodromy.discriminant, rep.discriminant_mismatch)),
                internal_flag: rep.flagged,
                det: rep.det,
                oracle,
            })
        }
        Mode::WienerHopf | Mode::Det | Mode::OracleCompare => {
            let spec = cfg.symbol.as_ref().expect("validated");
            let (tau, coupling) = (p.tau.expect("tau point"), p.coupling.expect("coupling point"));
            let unit = symbol_kernel(spec, one, tau)?;
            let kern = unit.to_semiseparable()?;
            let grid = Grid::trapezoid(0.0, tau, n)?;
            let quantity = if unit.is_continuous() && cfg.mode != Mode::WienerHopf { Quantity::Det } else { Quantity::Det2 };
            let det = match quantity {
                Quantity::Det => fredholm_det_with(&kern, coupling, &grid, &tol)?,
                Quantity::Det2 => fredholm_det2_with(&kern, coupling, &grid, &tol)?,
            };
            let closed_form = if cfg.mode == Mode::WienerHopf {
                let wh = wiener_hopf_det2(&symbol_kernel(spec, coupling, tau)?)?;
                Some((wh.day_a, rel(det.det2_b, wh.via_g).max(wh.spread)))
            } else {
                None
            };
            let oracle = cfg.oracle.then(|| oracle(&kern, &grid, coupling, quantity)).transpose()?;
            Ok(Outcome { internal_flag: det.flagged, det, closed_form, oracle })
        }
    }
}

fn run_point(cfg: &RunConfig, index: usize, p: &Point) -> Result<Row, PointError> {
    let start = Instant::now();
    let out = evaluate(cfg, p).map_err(|source| PointError { index, point: describe(p), source })?;
    let det = &out.det;
    let reference = match det.quantity {
        Quantity::Det => det.det_b,
        Quantity::Det2 => det.det2_b,
    };
    let oracle_discrepancy = out.oracle.map(|o| rel(o, reference));
    let closed_form_discrepancy = out.closed_form.map(|c| c.1);
    let flagged = out.internal_flag
        || !(det.route_discrepancy <= cfg.route_tol)
        || closed_form_discrepancy.is_some_and(|d| !(d <= cfg.closed_form_tol))
        || oracle_discrepancy.is_some_and(|d| !(d <= cfg.oracle_tol));
    if flagged {
        log::warn!("point {index} ({}) flagged", describe(p));
    }
    Ok(Row {
        mode: cfg.mode,
        point: *p,
        det_a: det.det_a,
        det_b: det.det_b,
        det2_a: det.det2_a,
        det2_b: det.det2_b,
        closed_form: out.closed_form.map(|c| c.0),
        route_discrepancy: det.route_discrepancy,
        closed_form_discrepancy,
        oracle_value: out.oracle,
        oracle_discrepancy,
        flagged,
        grid_n: cfg.grid_n,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Evaluates every sweep point; rows come back in input order.
pub fn run(cfg: &RunConfig) -> Result<Vec<Row>, PointError> {
    let pts = points(cfg);
    pts.par_iter().enumerate().map(|(i, p)| run_point(cfg, i, p)).collect()
}

pub fn write_csv(rows: &[Row], out: impl Write) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}
