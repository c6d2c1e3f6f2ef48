//! Intervals and quadrature grids.

use crate::error::{Error, Result};

/// An interval `(a, b)` with possibly infinite endpoints, together with the
/// finite window `[lo, hi]` that computations actually run on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    a: f64,
    b: f64,
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn finite(a: f64, b: f64) -> Result<Self> {
        Self::truncated(a, b, a, b)
    }

    /// `a`/`b` may be `-inf`/`+inf`; `[lo, hi]` must be finite and inside.
    pub fn truncated(a: f64, b: f64, lo: f64, hi: f64) -> Result<Self> {
        if a.is_nan() || b.is_nan() || !(a < b) {
            return Err(Error::InvalidInterval(format!("need a < b, got a = {a}, b = {b}")));
        }
        if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
            return Err(Error::InvalidInterval(format!(
                "truncation window [{lo}, {hi}] must be finite and non-empty"
            )));
        }
        if lo < a || hi > b {
            return Err(Error::InvalidInterval(format!(
                "truncation window [{lo}, {hi}] is not contained in ({a}, {b})"
            )));
        }
        Ok(Self { a, b, lo, hi })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Lower end of the computational window (a*).
    pub fn lo(&self) -> f64 {
        self.lo
    }

    /// Upper end of the computational window (b*).
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    /// Membership in the closed computational window, with a relative slack
    /// of a few ulps so that grid endpoints always pass.
    pub fn contains(&self, x: f64) -> bool {
        let slack = 1e-12 * (1.0 + self.lo.abs().max(self.hi.abs()));
        x >= self.lo - slack && x <= self.hi + slack
    }

    pub fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                x,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureRule {
    /// Composite trapezoid on arbitrary (possibly non-uniform) nodes that
    /// include both window endpoints.
    Trapezoid,
    /// Gauss-Legendre panels; endpoints are not nodes.
    GaussLegendre { panels: usize, order: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    rule: QuadratureRule,
}

impl Grid {
    /// Uniform composite trapezoid grid with `n` nodes on `[lo, hi]`.
    pub fn trapezoid(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::trapezoid_with_breakpoints(lo, hi, n, &[])
    }

    /// Composite trapezoid grid with roughly `n` nodes on `[lo, hi]` such that
    /// every breakpoint strictly inside the window is a node. Each piece gets
    /// a uniform sub-grid with a share of nodes proportional to its length.
    pub fn trapezoid_with_breakpoints(lo: f64, hi: f64, n: usize, breakpoints: &[f64]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 nodes, got {n}")));
        }
        if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
            return Err(Error::InvalidGrid(format!("bad window [{lo}, {hi}]")));
        }
        let len = hi - lo;
        let tiny = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        let mut cuts: Vec<f64> = breakpoints
            .iter()
            .copied()
            .filter(|&p| p.is_finite() && p > lo + tiny && p < hi - tiny)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= tiny);
        let mut edges = Vec::with_capacity(cuts.len() + 2);
        edges.push(lo);
        edges.extend(cuts);
        edges.push(hi);

        let total_intervals = (n - 1).max(edges.len() - 1);
        let h = len / total_intervals as f64;
        let mut nodes = vec![lo];
        for w in edges.windows(2) {
            let k = ((w[1] - w[0]) / h).round().max(1.0) as usize;
            for j in 1..=k {
                nodes.push(if j == k { w[1] } else { w[0] + (w[1] - w[0]) * j as f64 / k as f64 });
            }
        }
        let weights = trapezoid_weights(&nodes);
        Ok(Self {
            nodes,
            weights,
            rule: QuadratureRule::Trapezoid,
        })
    }

    /// Composite Gauss-Legendre rule: `panels` equal panels of `order` points.
    pub fn gauss_legendre(lo: f64, hi: f64, panels: usize, order: usize) -> Result<Self> {
        if panels == 0 || order == 0 {
            return Err(Error::InvalidGrid("panels and order must be positive".into()));
        }
        if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
            return Err(Error::InvalidGrid(format!("bad window [{lo}, {hi}]")));
        }
        let (t, w) = gauss_legendre_nodes(order);
        let ph = (hi - lo) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let c = lo + (p as f64 + 0.5) * ph;
            for (ti, wi) in t.iter().zip(&w) {
                nodes.push(c + 0.5 * ph * ti);
                weights.push(0.5 * ph * wi);
            }
        }
        Ok(Self {
            nodes,
            weights,
            rule: QuadratureRule::GaussLegendre { panels, order },
        })
    }

    /// Trapezoid grid on explicitly supplied nodes (must be strictly increasing).
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidGrid("need at least 2 nodes".into()));
        }
        if nodes.iter().any(|x| !x.is_finite()) || nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidGrid("nodes must be finite and strictly increasing".into()));
        }
        let weights = trapezoid_weights(&nodes);
        Ok(Self {
            nodes,
            weights,
            rule: QuadratureRule::Trapezoid,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_trapezoid(&self) -> bool {
        self.rule == QuadratureRule::Trapezoid
    }

    pub fn first(&self) -> f64 {
        self.nodes[0]
    }

    pub fn last(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Largest spacing between consecutive nodes.
    pub fn max_step(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    pub fn integrate<T>(&self, values: &[T]) -> T
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::iter::Sum<T>,
    {
        assert_eq!(values.len(), self.nodes.len());
        values.iter().zip(&self.weights).map(|(&v, &w)| v * w).sum()
    }

    /// Index of the node closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        match self.nodes.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i == self.nodes.len() => i - 1,
            Err(i) => {
                if x - self.nodes[i - 1] <= self.nodes[i] - x {
                    i - 1
                } else {
                    i
                }
            }
        }
    }

    /// Bracketing cell `(i, t)` with `x = (1 - t) x_i + t x_{i+1}`, clamped to
    /// the grid.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.nodes.len();
        let i = match self.nodes.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        };
        let t = ((x - self.nodes[i]) / (self.nodes[i + 1] - self.nodes[i])).clamp(0.0, 1.0);
        (i, t)
    }

    pub(crate) fn require_trapezoid(&self, what: &'static str) -> Result<()> {
        if self.is_trapezoid() {
            Ok(())
        } else {
            Err(Error::UnsupportedGrid(what))
        }
    }
}

fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = 0.5 * (nodes[i + 1] - nodes[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    w
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, t);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -t;
        x[n - 1 - i] = t;
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}
