//! Hopf manifolds `(C^n \ {0}) / (z ~ alpha z)` with `|alpha_i|` all equal:
//! the standard metric `omega_H = delta / r^2`, the explicit Chern-Ricci
//! flow `omega(t) = omega_H - t Ric(omega_H)`, and the pointwise trace
//! inequality along perturbations of it.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::linalg;

use super::jet::{PointJet, TestPotential};
use super::ModelError;

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

/// Finite sample of the fundamental annulus `1 <= |z| < |alpha|`.
#[derive(Debug, Clone, PartialEq)]
pub struct HopfSampleSet {
    alpha: Vec<C>,
    points: Vec<Vec<C>>,
}

fn norm2(z: &[C]) -> f64 {
    z.iter().map(|v| v.norm_sqr()).sum()
}

impl HopfSampleSet {
    pub fn new(alpha: Vec<C>, points: Vec<Vec<C>>) -> Result<Self, ModelError> {
        let n = alpha.len();
        if n < 2 {
            return Err(ModelError::Domain("Hopf manifolds need n >= 2".into()));
        }
        let m = alpha[0].norm();
        if alpha.iter().any(|a| (a.norm() - m).abs() > 1e-14) {
            return Err(ModelError::Domain("all |alpha_i| must be equal".into()));
        }
        if !(m > 1.0 + 1e-9) || !m.is_finite() {
            return Err(ModelError::Domain(format!("need |alpha| > 1, got {m}")));
        }
        for z in &points {
            if z.len() != n {
                return Err(ModelError::Domain(format!("point has {} coordinates, expected {n}", z.len())));
            }
            let r = norm2(z).sqrt();
            if !(1.0 <= r && r < m) {
                return Err(ModelError::Domain(format!("|z| = {r} outside the annulus [1, {m})")));
            }
        }
        Ok(HopfSampleSet { alpha, points })
    }

    /// `count` points, log-uniform in `|z|`, isotropic in direction. The
    /// parameters `alpha_k = modulus * exp(i k)` share one modulus.
    pub fn random(n: usize, modulus: f64, count: usize, rng: &mut impl Rng) -> Result<Self, ModelError> {
        let alpha: Vec<C> = (0..n).map(|k| C::from_polar(modulus, k as f64)).collect();
        let log_max = modulus.ln();
        let mut points = Vec::with_capacity(count);
        for _ in 0..count {
            let dir: Vec<C> = (0..n)
                .map(|_| C::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let len = norm2(&dir).sqrt();
            let r = (rng.gen_range(0.0..1.0) * log_max).exp();
            points.push(dir.into_iter().map(|v| v * (r / len)).collect());
        }
        Self::new(alpha, points)
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[C] {
        &self.alpha
    }

    pub fn modulus(&self) -> f64 {
        self.alpha[0].norm()
    }

    pub fn points(&self) -> &[Vec<C>] {
        &self.points
    }
}

/// `omega_H = delta_{ij} / r^2`.
pub fn hopf_metric(z: &[C]) -> Vec<C> {
    invariant_value(z, 1.0, 0.0)
}

/// `Ric(omega_H) = (n / r^2)(delta_{ij} - zbar_i z_j / r^2)`.
pub fn hopf_ricci(z: &[C]) -> Vec<C> {
    let n = z.len() as f64;
    invariant_value(z, n, -n)
}

/// `omega_T = zbar_i z_j / r^4`, the limit of the explicit solution at `t = 1/n`.
pub fn limit_form(z: &[C]) -> Vec<C> {
    invariant_value(z, 0.0, 1.0)
}

fn invariant_value(z: &[C], a: f64, b: f64) -> Vec<C> {
    let n = z.len();
    let r2 = norm2(z);
    let mut m = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = b * z[i].conj() * z[j] / (r2 * r2);
        }
        m[i * n + i] += a / r2;
    }
    m
}

/// Explicit solution `omega(t) = omega_H - t Ric(omega_H)`, `0 <= t < 1/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfExplicitSolution {
    pub n: usize,
    pub t: f64,
}

impl HopfExplicitSolution {
    pub fn new(n: usize, t: f64) -> Result<Self, ModelError> {
        check_time(n, t)?;
        Ok(HopfExplicitSolution { n, t })
    }

    fn coeffs(&self) -> (f64, f64) {
        let nt = self.n as f64 * self.t;
        (1.0 - nt, nt)
    }

    /// `(1/r^2)((1 - nt) delta + nt zbar_i z_j / r^2)`
    pub fn metric(&self, z: &[C]) -> Vec<C> {
        let (a, b) = self.coeffs();
        invariant_value(z, a, b)
    }

    /// `d omega / dt`, differentiated by hand from [`Self::metric`].
    pub fn time_derivative(&self, z: &[C]) -> Vec<C> {
        let n = self.n as f64;
        invariant_value(z, -n, n)
    }

    pub fn jet(&self, z: &[C]) -> PointJet {
        let (a, b) = self.coeffs();
        PointJet::invariant(z, a, b)
    }

    /// `(1 - nt)^{n-1} / r^{2n}`
    pub fn determinant(&self, z: &[C]) -> f64 {
        let (a, _) = self.coeffs();
        a.powi(self.n as i32 - 1) / norm2(z).powi(self.n as i32)
    }

    /// Eigenvalues of `r^2 omega(t)` in ascending order.
    pub fn scaled_eigenvalues(&self) -> Vec<f64> {
        let (a, _) = self.coeffs();
        let mut ev = vec![a; self.n - 1];
        ev.push(1.0);
        ev
    }
}

fn check_time(n: usize, t: f64) -> Result<(), ModelError> {
    if !(t >= 0.0 && t < 1.0 / n as f64) {
        return Err(ModelError::Domain(format!("t = {t} outside [0, 1/{n})")));
    }
    Ok(())
}

fn max_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

/// Metric of the explicit solution and its Chern-Ricci form at each point.
#[derive(Debug, Clone, PartialEq)]
pub struct HopfValues {
    pub metric: Vec<Vec<C>>,
    /// Chern-Ricci form of `omega(t)`, from its 2-jet.
    pub ricci: Vec<Vec<C>>,
    /// `max |Ric(omega(t)) - Ric(omega_H)|`
    pub ricci_drift: f64,
}

pub fn hopf_metric_and_ricci(points: &HopfSampleSet, t: f64) -> Result<HopfValues, ModelError> {
    let sol = HopfExplicitSolution::new(points.n(), t)?;
    let mut metric = Vec::new();
    let mut ricci = Vec::new();
    let mut drift = 0.0f64;
    for z in points.points() {
        metric.push(sol.metric(z));
        let ric = sol.jet(z).chern_ricci().ok_or(ModelError::NotPositiveDefinite(0.0))?;
        drift = drift.max(max_diff(&ric, &hopf_ricci(z)));
        ricci.push(ric);
    }
    Ok(HopfValues { metric, ricci, ricci_drift: drift })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HopfFlowReport {
    /// `max |d omega / dt + Ric(omega(t))|`
    pub residual: f64,
    /// Same with `d/dt` replaced by a central difference (step `fd_step`).
    pub fd_residual: f64,
    pub fd_step: f64,
    /// `max |det omega(t) - (1 - nt)^{n-1} / r^{2n}|`
    pub det_residual: f64,
    /// `max |(omega_H - Ric(omega_H)/n) - zbar_i z_j / r^4|`
    pub limit_residual: f64,
    /// `max` eigenvalue error of `r^2 omega(t)`.
    pub eigen_residual: f64,
}

pub fn verify_hopf_flow(points: &HopfSampleSet, times: &[f64]) -> Result<HopfFlowReport, ModelError> {
    let n = points.n();
    for &t in times {
        check_time(n, t)?;
    }
    let h = 1e-5;
    let mut rep = HopfFlowReport {
        residual: 0.0,
        fd_residual: 0.0,
        fd_step: h,
        det_residual: 0.0,
        limit_residual: 0.0,
        eigen_residual: 0.0,
    };
    for z in points.points() {
        let ric_h = PointJet::invariant(z, 1.0, 0.0).chern_ricci().ok_or(ModelError::NotPositiveDefinite(0.0))?;
        let limit: Vec<C> = hopf_metric(z).iter().zip(&ric_h).map(|(g, r)| g - r / n as f64).collect();
        rep.limit_residual = rep.limit_residual.max(max_diff(&limit, &limit_form(z)));
        let r2 = norm2(z);
        for &t in times {
            let sol = HopfExplicitSolution { n, t };
            let ric = sol.jet(z).chern_ricci().ok_or(ModelError::NotPositiveDefinite(0.0))?;
            let dt = sol.time_derivative(z);
            let flow: Vec<C> = dt.iter().zip(&ric).map(|(a, b)| a + b).collect();
            rep.residual = rep.residual.max(flow.iter().fold(0.0, |m, v| m.max(v.norm())));

            let (lo, hi) = if t >= h { (t - h, t + h) } else { (t, t + 2.0 * h) };
            let a = HopfExplicitSolution { n, t: lo }.metric(z);
            let b = HopfExplicitSolution { n, t: hi }.metric(z);
            let fd = a.iter().zip(&b).zip(&ric).fold(0.0f64, |m, ((x, y), r)| m.max(((y - x) / (hi - lo) + r).norm()));
            rep.fd_residual = rep.fd_residual.max(fd);

            let g = sol.metric(z);
            let det = linalg::hermitian_det(&g, n);
            rep.det_residual = rep.det_residual.max((det - sol.determinant(z)).abs());

            let scaled: Vec<C> = g.iter().map(|v| v * r2).collect();
            let mut ev = linalg::hermitian_eigenvalues(&scaled, n);
            ev.sort_by(|a, b| a.total_cmp(b));
            let expect = sol.scaled_eigenvalues();
            let err = ev.iter().zip(&expect).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            rep.eigen_residual = rep.eigen_residual.max(err);
        }
    }
    Ok(rep)
}

/// Pullback defect under the deck transformation `z -> alpha z` of the
/// explicit solution and of its Ricci form.
pub fn deck_defect(points: &HopfSampleSet, t: f64) -> Result<f64, ModelError> {
    let n = points.n();
    let sol = HopfExplicitSolution::new(n, t)?;
    let alpha = points.alpha();
    let mut worst = 0.0f64;
    for z in points.points() {
        let w: Vec<C> = z.iter().zip(alpha).map(|(a, b)| a * b).collect();
        let pull = |m: &[C]| -> Vec<C> {
            (0..n * n).map(|c| alpha[c / n] * alpha[c % n].conj() * m[c]).collect()
        };
        worst = worst.max(max_diff(&pull(&sol.metric(&w)), &sol.metric(z)));
        let ric_w = sol.jet(&w).chern_ricci().ok_or(ModelError::NotPositiveDefinite(0.0))?;
        let ric_z = sol.jet(z).chern_ricci().ok_or(ModelError::NotPositiveDefinite(0.0))?;
        worst = worst.max(max_diff(&pull(&ric_w), &ric_z));
    }
    Ok(worst)
}

/// Residuals of the pointwise chain bounding `tr_{omega_H} omega` from above.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HopfChainReport {
    /// Evolution of `tr_{omega_H} omega` against its expansion.
    pub claim1: f64,
    /// `g^{jbar i} (d_i dbar_j g_H^{lbar k}) g_{k lbar} = tr_{omega_H} omega * tr_omega omega_H`
    pub doubletrace: f64,
    /// Reference-metric torsion term against its closed form.
    pub claim2: f64,
    /// `A_2 = 2(n-1) g^{jbar i} zbar_i z_j / r^4`
    pub a2: f64,
    /// `max((d/dt - Delta) tr - (2/n - tr/n) tr_omega Ric(omega_H), 0)`
    pub violation: f64,
    /// Largest value of the right side of the final inequality.
    pub max_bound: f64,
}

impl HopfChainReport {
    pub fn max_equality_residual(&self) -> f64 {
        self.claim1.max(self.doubletrace).max(self.claim2).max(self.a2)
    }
}

struct Mat {
    n: usize,
}

impl Mat {
    fn mul(&self, a: &[C], b: &[C]) -> Vec<C> {
        linalg::matmul(a, b, self.n)
    }
    fn mul3(&self, a: &[C], b: &[C], c: &[C]) -> Vec<C> {
        self.mul(&self.mul(a, b), c)
    }
}

/// Checks the chain for `omega = omega_hat_t + i ddbar phi` at every point.
pub fn verify_hopf_trace_chain(
    points: &HopfSampleSet,
    t: f64,
    potential: &TestPotential,
) -> Result<HopfChainReport, ModelError> {
    let n = points.n();
    check_time(n, t)?;
    let mm = Mat { n };
    let nf = n as f64;
    let i4 = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
    let i3 = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
    let slice = |v: &[C], a: usize| -> Vec<C> { v[a * n * n..(a + 1) * n * n].to_vec() };
    let mut rep = HopfChainReport { max_bound: f64::NEG_INFINITY, ..Default::default() };

    for z in points.points() {
        let r2 = norm2(z);
        let r4 = r2 * r2;
        let zb: Vec<C> = z.iter().map(|v| v.conj()).collect();
        let gh = PointJet::invariant(z, 1.0, 0.0);
        let ghat = HopfExplicitSolution { n, t }.jet(z);
        let pj = potential
            .ddbar_jet(z)
            .ok_or_else(|| ModelError::Domain("potential terms do not match n".into()))?;
        let g = &ghat + &pj;
        if !g.is_positive_definite() {
            return Err(ModelError::NotPositiveDefinite(linalg::min_eigenvalue(&g.g, n)));
        }
        let gi = g.inverse().ok_or(ModelError::NotPositiveDefinite(0.0))?;
        let hi = gh.inverse().ok_or(ModelError::NotPositiveDefinite(0.0))?;

        // Derivatives of the inverse Hopf metric from its jet.
        let d_hi: Vec<Vec<C>> = (0..n)
            .map(|i| mm.mul3(&hi, &slice(&gh.dg, i), &hi).into_iter().map(|v| -v).collect())
            .collect();
        let db_hi: Vec<Vec<C>> = (0..n)
            .map(|j| mm.mul3(&hi, &slice(&gh.dbg, j), &hi).into_iter().map(|v| -v).collect())
            .collect();
        let mut dd_hi = vec![Vec::new(); n * n];
        for i in 0..n {
            for j in 0..n {
                let a = mm.mul(&mm.mul3(&hi, &slice(&gh.dbg, j), &hi), &mm.mul(&slice(&gh.dg, i), &hi));
                let b = mm.mul(&mm.mul3(&hi, &slice(&gh.dg, i), &hi), &mm.mul(&slice(&gh.dbg, j), &hi));
                let c = mm.mul3(&hi, &slice(&gh.ddg, i * n + j), &hi);
                dd_hi[i * n + j] = (0..n * n).map(|e| a[e] + b[e] - c[e]).collect();
            }
        }

        // Inverse matrices are stored as ordinary inverses: m[l*n+k] = m^{lbar k}.
        let tr: f64 = (0..n).flat_map(|k| (0..n).map(move |l| (k, l))).map(|(k, l)| (hi[l * n + k] * g.g[k * n + l]).re).sum();
        let tr_back: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (gi[j * n + i] * gh.g[i * n + j]).re).sum();
        let ric_g = g.chern_ricci().ok_or(ModelError::NotPositiveDefinite(0.0))?;
        let ric_h = hopf_ricci(z);
        let tr_ric_h: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (gi[j * n + i] * ric_h[i * n + j]).re).sum();
        let zz: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (gi[j * n + i] * zb[i] * z[j]).re).sum::<f64>() / r4;

        // Left side: d/dt tr = -g_H^{lbar k} Ric_{k lbar}, Laplacian by the product rule.
        let mut dt_tr = ZERO;
        for k in 0..n {
            for l in 0..n {
                dt_tr -= hi[l * n + k] * ric_g[k * n + l];
            }
        }
        let mut lap = ZERO;
        let mut dbl_lhs = ZERO;
        for i in 0..n {
            for j in 0..n {
                let w = gi[j * n + i];
                let mut s = ZERO;
                let mut d = ZERO;
                for k in 0..n {
                    for l in 0..n {
                        d += dd_hi[i * n + j][l * n + k] * g.g[k * n + l];
                        s += hi[l * n + k] * g.ddg[i4(i, j, k, l)]
                            + d_hi[i][l * n + k] * g.dbg[i3(j, k, l)]
                            + db_hi[j][l * n + k] * g.dg[i3(i, k, l)];
                    }
                }
                lap += w * (s + d);
                dbl_lhs += w * d;
            }
        }
        let lhs = (dt_tr - lap).re;

        // Right side of the first claim with the closed-form Hopf inverse.
        let mut t1 = ZERO;
        let mut t2 = ZERO;
        let mut t3 = ZERO;
        let mut t4 = ZERO;
        let mut c2 = ZERO;
        let mut a2 = ZERO;
        let trace_g: C = (0..n).map(|k| g.g[k * n + k]).sum();
        for i in 0..n {
            for j in 0..n {
                let w = gi[j * n + i];
                if i == j {
                    t1 -= w * trace_g;
                }
                for k in 0..n {
                    t3 += w * zb[i] * g.dbg[i3(j, k, k)];
                    for l in 0..n {
                        let diff = ghat.ddg[i4(k, l, i, j)] - ghat.ddg[i4(i, j, k, l)];
                        if k == l {
                            t2 += r2 * w * diff;
                        }
                        c2 += hi[l * n + k] * w * diff;
                        a2 += w * d_hi[i][l * n + k] * (ghat.dbg[i3(j, k, l)] - ghat.dbg[i3(l, k, j)]);
                    }
                }
            }
        }
        for k in 0..n {
            for p in 0..n {
                for q in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            t4 -= r2 * gi[j * n + p] * gi[q * n + i] * g.dg[i3(k, p, q)] * g.dbg[i3(k, i, j)];
                        }
                    }
                }
            }
        }
        let rhs1 = (t1 + t2 + t4).re - 2.0 * t3.re;
        rep.claim1 = rep.claim1.max((lhs - rhs1).abs());
        rep.doubletrace = rep.doubletrace.max((dbl_lhs.re - tr * tr_back).abs() + dbl_lhs.im.abs());
        let c2_rhs = tr_ric_h - nf * zz - (nf - 2.0) * tr_back;
        rep.claim2 = rep.claim2.max((c2.re - c2_rhs).abs() + c2.im.abs());
        let a2_lhs = -2.0 * a2.re;
        rep.a2 = rep.a2.max((a2_lhs - 2.0 * (nf - 1.0) * zz).abs());
        let bound = (2.0 / nf - tr / nf) * tr_ric_h;
        rep.violation = rep.violation.max(lhs - bound);
        rep.max_bound = rep.max_bound.max(bound);
    }
    Ok(rep)
}
