//! Pointwise 2-jets of Hermitian metrics on open subsets of `C^n`.

use std::ops::Add;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::linalg;

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

/// Metric value and the derivatives needed for Chern-Ricci computations.
///
/// * `g[i*n+j]` is `g_{i jbar}`
/// * `dg[(k*n+i)*n+j]` is `d_k g_{i jbar}`
/// * `dbg[(l*n+i)*n+j]` is `dbar_l g_{i jbar}`
/// * `ddg[((k*n+l)*n+i)*n+j]` is `d_k dbar_l g_{i jbar}`
#[derive(Debug, Clone, PartialEq)]
pub struct PointJet {
    pub n: usize,
    pub g: Vec<C>,
    pub dg: Vec<C>,
    pub dbg: Vec<C>,
    pub ddg: Vec<C>,
}

impl PointJet {
    pub fn zero(n: usize) -> Self {
        PointJet {
            n,
            g: vec![ZERO; n * n],
            dg: vec![ZERO; n * n * n],
            dbg: vec![ZERO; n * n * n],
            ddg: vec![ZERO; n * n * n * n],
        }
    }

    /// Jet of `a delta_{ij} / r^2 + b zbar_i z_j / r^4`, the unitarily
    /// invariant family containing the Hopf metric, its Chern-Ricci form and
    /// the explicit flow.
    pub fn invariant(z: &[C], a: f64, b: f64) -> Self {
        let n = z.len();
        let r2: f64 = z.iter().map(|v| v.norm_sqr()).sum();
        let (r4, r6, r8) = (r2 * r2, r2 * r2 * r2, r2 * r2 * r2 * r2);
        let zb: Vec<C> = z.iter().map(|v| v.conj()).collect();
        let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
        let mut jet = PointJet::zero(n);
        for i in 0..n {
            for j in 0..n {
                jet.g[i * n + j] = a * d(i, j) / r2 + b * zb[i] * z[j] / r4;
                for k in 0..n {
                    jet.dg[(k * n + i) * n + j] = -a * d(i, j) * zb[k] / r4
                        + b * (d(j, k) * zb[i] / r4 - 2.0 * zb[i] * z[j] * zb[k] / r6);
                    jet.dbg[(k * n + i) * n + j] = -a * d(i, j) * z[k] / r4
                        + b * (d(i, k) * z[j] / r4 - 2.0 * zb[i] * z[j] * z[k] / r6);
                    for l in 0..n {
                        let av = a * d(i, j) * (-d(k, l) / r4 + 2.0 * zb[k] * z[l] / r6);
                        let bv = b
                            * (d(i, l) * d(j, k) / r4
                                - 2.0 * d(i, l) * z[j] * zb[k] / r6
                                - 2.0 * d(j, k) * zb[i] * z[l] / r6
                                - 2.0 * d(k, l) * zb[i] * z[j] / r6
                                + 6.0 * zb[i] * z[j] * zb[k] * z[l] / r8);
                        jet.ddg[((k * n + l) * n + i) * n + j] = av + bv;
                    }
                }
            }
        }
        jet
    }

    pub fn inverse(&self) -> Option<Vec<C>> {
        linalg::inverse(&self.g, self.n)
    }

    pub fn is_positive_definite(&self) -> bool {
        linalg::cholesky(&self.g, self.n).is_some()
    }

    /// `Ric_{k lbar} = -d_k dbar_l log det g`, expanded as
    /// `-(g^{jbar i} d_k dbar_l g_{i jbar} - g^{jbar p} g^{qbar i} d_k g_{p qbar} dbar_l g_{i jbar})`.
    pub fn chern_ricci(&self) -> Option<Vec<C>> {
        let n = self.n;
        let inv = self.inverse()?;
        let mut ric = vec![ZERO; n * n];
        for k in 0..n {
            for l in 0..n {
                let mut s = ZERO;
                for i in 0..n {
                    for j in 0..n {
                        s += inv[j * n + i] * self.ddg[((k * n + l) * n + i) * n + j];
                        for p in 0..n {
                            for q in 0..n {
                                s -= inv[j * n + p]
                                    * inv[q * n + i]
                                    * self.dg[(k * n + p) * n + q]
                                    * self.dbg[(l * n + i) * n + j];
                            }
                        }
                    }
                }
                ric[k * n + l] = -s;
            }
        }
        Some(ric)
    }
}

impl Add for &PointJet {
    type Output = PointJet;

    fn add(self, o: &PointJet) -> PointJet {
        let sum = |a: &[C], b: &[C]| a.iter().zip(b).map(|(x, y)| x + y).collect();
        PointJet {
            n: self.n,
            g: sum(&self.g, &o.g),
            dg: sum(&self.dg, &o.dg),
            dbg: sum(&self.dbg, &o.dbg),
            ddg: sum(&self.ddg, &o.ddg),
        }
    }
}

/// `Re(coef * z^alpha * zbar^beta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: [f64; 2],
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
}

/// Test potential on a Hopf chart: real polynomial part plus
/// `log_coef * log r^2`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TestPotential {
    #[serde(default)]
    pub terms: Vec<Monomial>,
    #[serde(default)]
    pub log_coef: f64,
}

fn falling(power: u32, times: u32) -> f64 {
    if times > power {
        return 0.0;
    }
    (0..times).map(|s| (power - s) as f64).product()
}

/// `d^{holo} dbar^{anti} (c z^alpha zbar^beta)`, where `holo` and `anti` list
/// differentiation variables with repetition.
fn monomial_derivative(c: C, alpha: &[u32], beta: &[u32], holo: &[usize], anti: &[usize], z: &[C]) -> C {
    let n = z.len();
    let mut mh = vec![0u32; n];
    let mut ma = vec![0u32; n];
    for &h in holo {
        mh[h] += 1;
    }
    for &a in anti {
        ma[a] += 1;
    }
    let mut v = c;
    for s in 0..n {
        let fa = falling(alpha[s], mh[s]);
        let fb = falling(beta[s], ma[s]);
        if fa == 0.0 || fb == 0.0 {
            return ZERO;
        }
        v *= fa * fb;
        v *= z[s].powu(alpha[s] - mh[s]) * z[s].conj().powu(beta[s] - ma[s]);
    }
    v
}

impl TestPotential {
    /// `Re(c z1 zbar2)` style potential with the given coefficient.
    pub fn mixed_quadratic(n: usize, coef: f64) -> Self {
        let mut alpha = vec![0; n];
        let mut beta = vec![0; n];
        alpha[0] = 1;
        beta[1] = 1;
        TestPotential { terms: vec![Monomial { coef: [coef, 0.0], alpha, beta }], log_coef: 0.0 }
    }

    fn validate(&self, n: usize) -> bool {
        self.terms.iter().all(|m| m.alpha.len() == n && m.beta.len() == n)
    }

    /// Mixed derivative of the polynomial part. Each term `Re(w)` is
    /// `(c z^a zbar^b + conj(c) z^b zbar^a) / 2`.
    fn poly_derivative(&self, holo: &[usize], anti: &[usize], z: &[C]) -> C {
        let mut s = ZERO;
        for m in &self.terms {
            let c = C::new(m.coef[0], m.coef[1]);
            s += 0.5 * monomial_derivative(c, &m.alpha, &m.beta, holo, anti, z);
            s += 0.5 * monomial_derivative(c.conj(), &m.beta, &m.alpha, holo, anti, z);
        }
        s
    }

    pub fn value(&self, z: &[C]) -> f64 {
        let r2: f64 = z.iter().map(|v| v.norm_sqr()).sum();
        self.poly_derivative(&[], &[], z).re + self.log_coef * r2.ln()
    }

    /// Jet of `i ddbar phi` at `z`, or `None` if term lengths mismatch.
    pub fn ddbar_jet(&self, z: &[C]) -> Option<PointJet> {
        let n = z.len();
        if !self.validate(n) {
            return None;
        }
        let mut jet = PointJet::invariant(z, self.log_coef, -self.log_coef);
        for i in 0..n {
            for j in 0..n {
                jet.g[i * n + j] += self.poly_derivative(&[i], &[j], z);
                for k in 0..n {
                    jet.dg[(k * n + i) * n + j] += self.poly_derivative(&[i, k], &[j], z);
                    jet.dbg[(k * n + i) * n + j] += self.poly_derivative(&[i], &[j, k], z);
                    for l in 0..n {
                        jet.ddg[((k * n + l) * n + i) * n + j] += self.poly_derivative(&[i, k], &[j, l], z);
                    }
                }
            }
        }
        Some(jet)
    }
}
