//! Gauss-Legendre quadrature and path integrals of one-forms.
//!
//! The transformation potentials are path integrals of closed one-forms over
//! leaves on which two of the four coordinates are frozen.  All paths here
//! are piecewise straight in the four complex coordinates; the integrand is
//! evaluated pointwise and contracted with the constant segment direction.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;

use crate::error::Result;
use crate::jet::{BasePoint, Variable};

/// Nodes and weights of an n-point Gauss-Legendre rule on [0, 1].
#[derive(Debug)]
pub struct GaussLegendre {
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    fn build(order: usize) -> GaussLegendre {
        assert!(order >= 1, "quadrature order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // roots of the Legendre polynomial on [-1, 1] by Newton iteration
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let mut p0 = 1.0;
                let mut p1 = x;
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let p = if n == 1 { x } else { p1 };
                let pm1 = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
                let step = p / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // mirror pair, mapped to [0, 1]
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        GaussLegendre { order, nodes, weights }
    }

    /// Integral of f over [0, 1].
    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, mut f: F) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| f(t) * w)
            .fold(Complex64::default(), |acc, v| acc + v)
    }
}

/// Shared rule of the given order; built once, cached for the process.
pub fn gauss_legendre(order: usize) -> Arc<GaussLegendre> {
    static RULES: OnceLock<RwLock<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let lock = RULES.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(rule) = lock.read().unwrap().get(&order) {
        return rule.clone();
    }
    let rule = Arc::new(GaussLegendre::build(order));
    lock.write().unwrap().entry(order).or_insert(rule).clone()
}

/// Linear interpolation between two base points, coordinate by coordinate.
pub fn lerp(from: BasePoint, to: BasePoint, t: f64) -> BasePoint {
    let c = |v: Variable| from.coordinate(v) + t * (to.coordinate(v) - from.coordinate(v));
    BasePoint::Independent {
        y: c(Variable::Y),
        ybar: c(Variable::YBar),
        z: c(Variable::Z),
        zbar: c(Variable::ZBar),
    }
}

/// A piecewise-straight path through the four complex coordinates.
#[derive(Debug, Clone)]
pub struct Path {
    waypoints: Vec<BasePoint>,
}

impl Path {
    pub fn straight(from: BasePoint, to: BasePoint) -> Path {
        Path { waypoints: vec![from, to] }
    }

    /// A path through the given waypoints in order; needs at least two.
    pub fn through(waypoints: Vec<BasePoint>) -> Path {
        assert!(waypoints.len() >= 2, "a path needs at least two waypoints");
        Path { waypoints }
    }

    pub fn start(&self) -> BasePoint {
        self.waypoints[0]
    }

    pub fn end(&self) -> BasePoint {
        *self.waypoints.last().unwrap()
    }

    pub fn segments(&self) -> impl Iterator<Item = (BasePoint, BasePoint)> + '_ {
        self.waypoints.windows(2).map(|w| (w[0], w[1]))
    }

    /// Point at global parameter t in [0, 1], segments traversed uniformly.
    pub fn at(&self, t: f64) -> BasePoint {
        let nseg = self.waypoints.len() - 1;
        let s = (t * nseg as f64).clamp(0.0, nseg as f64);
        let i = (s.floor() as usize).min(nseg - 1);
        lerp(self.waypoints[i], self.waypoints[i + 1], s - i as f64)
    }
}

/// Integrates sum_v c_v dx_v along the path; `form` returns the coefficient
/// of dx_v at index Variable::index(v), and also receives the global path
/// parameter so failures can be located.
pub fn integrate_one_form<F>(path: &Path, order: usize, mut form: F) -> Result<Complex64>
where
    F: FnMut(f64, BasePoint) -> Result<[Complex64; 4]>,
{
    let rule = gauss_legendre(order);
    let nseg = path.waypoints.len() - 1;
    let mut total = Complex64::default();
    for (i, (a, b)) in path.segments().enumerate() {
        let delta: Vec<Complex64> = Variable::ALL
            .iter()
            .map(|&v| b.coordinate(v) - a.coordinate(v))
            .collect();
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let global_t = (i as f64 + t) / nseg as f64;
            let c = form(global_t, lerp(a, b, t))?;
            let mut along = Complex64::default();
            for (k, d) in delta.iter().enumerate() {
                if d.norm_sqr() > 0.0 {
                    along += c[k] * d;
                }
            }
            total += along * w;
        }
    }
    Ok(total)
}
