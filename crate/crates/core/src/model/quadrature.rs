//! Product Gauss-Legendre quadrature of (2,2)-forms over the fundamental
//! annulus of a Hopf surface.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use super::hopf::HopfExplicitSolution;
use super::jet::PointJet;
use super::ModelError;

type C = Complex64;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        for i in 0..order {
            let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(order, x);
            if d != 0.0 {
                dp = d;
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (m + h * x, h * w))
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Which (2,2)-form to integrate; `omega0 = omega_H` and `Ric` is its
/// Chern-Ricci form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HopfIntegrand {
    /// `omega0^2`
    Omega0Squared,
    /// `omega0 ^ Ric(omega0)`
    Omega0WedgeRic,
    /// `Ric(omega0)^2`
    RicSquared,
    /// `omega(t)^2` along the explicit solution.
    ExplicitVolume(f64),
}

impl FromStr for HopfIntegrand {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, ModelError> {
        match s {
            "omega0^2" => Ok(HopfIntegrand::Omega0Squared),
            "omega0^ric" => Ok(HopfIntegrand::Omega0WedgeRic),
            "ric^2" => Ok(HopfIntegrand::RicSquared),
            other => Err(ModelError::UnsupportedIntegrand(other.to_string())),
        }
    }
}

/// Quadrature settings: Hopf modulus `|alpha|` and points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfQuadrature {
    pub modulus: f64,
    pub order: usize,
}

impl HopfQuadrature {
    pub fn new(modulus: f64) -> Self {
        HopfQuadrature { modulus, order: 32 }
    }
}

/// `a ^ b` for real (1,1)-forms on `C^2` as a multiple of
/// `(i dz1 ^ dzbar1) ^ (i dz2 ^ dzbar2)`.
fn wedge(a: &[C], b: &[C]) -> f64 {
    (a[0] * b[3] + a[3] * b[0] - a[1] * b[2] - a[2] * b[1]).re
}

/// Integral over `{1 <= |z| < modulus}` in `C^2`, using
/// `z = e^s (cos th e^{i p1}, sin th e^{i p2})` with Lebesgue density
/// `e^{4s} cos th sin th` and `(i dz ^ dzbar) = 2 dx ^ dy`.
pub fn integrate_hopf(q: HopfQuadrature, integrand: HopfIntegrand) -> Result<f64, ModelError> {
    if !(q.modulus > 1.0) {
        return Err(ModelError::Domain(format!("need |alpha| > 1, got {}", q.modulus)));
    }
    if q.order < 2 {
        return Err(ModelError::Domain("quadrature order must be at least 2".into()));
    }
    if let HopfIntegrand::ExplicitVolume(t) = integrand {
        HopfExplicitSolution::new(2, t)?;
    }
    let gl = GaussLegendre::new(q.order);
    let s_nodes: Vec<(f64, f64)> = gl.on(0.0, q.modulus.ln()).collect();
    let th_nodes: Vec<(f64, f64)> = gl.on(0.0, 0.5 * PI).collect();
    let ph_nodes: Vec<(f64, f64)> = gl.on(0.0, 2.0 * PI).collect();

    let eval = |z: &[C]| -> f64 {
        let jet = PointJet::invariant(z, 1.0, 0.0);
        let ric = jet.chern_ricci().expect("Hopf metric is positive definite");
        match integrand {
            HopfIntegrand::Omega0Squared => wedge(&jet.g, &jet.g),
            HopfIntegrand::Omega0WedgeRic => wedge(&jet.g, &ric),
            HopfIntegrand::RicSquared => wedge(&ric, &ric),
            HopfIntegrand::ExplicitVolume(t) => {
                let g: Vec<C> = jet.g.iter().zip(&ric).map(|(a, r)| a - t * r).collect();
                wedge(&g, &g)
            }
        }
    };

    // One chunk per radial node, summed in index order for determinism.
    let partial: Vec<f64> = s_nodes
        .par_iter()
        .map(|&(s, ws)| {
            let r = s.exp();
            let mut acc = 0.0;
            for &(th, wt) in &th_nodes {
                let (c, sn) = (th.cos(), th.sin());
                for &(p1, w1) in &ph_nodes {
                    for &(p2, w2) in &ph_nodes {
                        let z = [C::from_polar(r * c, p1), C::from_polar(r * sn, p2)];
                        acc += wt * w1 * w2 * c * sn * eval(&z);
                    }
                }
            }
            ws * r.powi(4) * acc
        })
        .collect();
    Ok(4.0 * partial.iter().sum::<f64>())
}
