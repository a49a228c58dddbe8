use num_complex::Complex64;

use crate::geometry::{ScalarField, TorusChart};
use crate::registry::Named;
use crate::tensors::MetricData;

use super::krylov::bicgstab;
use super::problem::{EllipticProblem, EllipticSolution, SolveOptions};
use super::{EllipticError, EllipticMethod};

type C = Complex64;

/// Damped Newton on `(phi, b)` with continuation in `F`.
///
/// The Jacobian is the complex Laplacian of `omega' = omega + i ddbar phi`,
/// which is not symmetric for non-Kähler `omega`, so the linear solves use
/// BiCGSTAB preconditioned by the inverse of the mean-coefficient Laplacian.
pub struct NewtonContinuation;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub linear_tol: f64,
    pub max_linear: usize,
    pub max_newton: usize,
    /// Smallest continuation increment before giving up.
    pub min_increment: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { linear_tol: 1e-11, max_linear: 400, max_newton: 40, min_increment: 1.0 / 64.0 }
    }
}

impl Named for NewtonContinuation {
    fn name(&self) -> &'static str {
        "newton-continuation"
    }
}

fn fft_real(chart: &TorusChart, v: &[f64]) -> Vec<C> {
    let mut h: Vec<C> = v.iter().map(|&x| C::new(x, 0.0)).collect();
    chart.fft(&mut h, false);
    h
}

fn ifft_real(chart: &TorusChart, mut h: Vec<C>) -> Vec<f64> {
    chart.fft(&mut h, true);
    h.into_iter().map(|c| c.re).collect()
}

/// Nonzero modes annihilated by every Wirtinger symbol (Nyquist
/// combinations). The discrete Laplacian cannot reach them.
fn kernel_modes(chart: &TorusChart) -> Vec<bool> {
    let n = chart.complex_dim();
    (0..chart.node_count())
        .map(|m| m != 0 && (0..n).all(|k| chart.symbol_d(k)[m].norm() == 0.0))
        .collect()
}

struct Linearization<'a> {
    chart: &'a TorusChart,
    data: MetricData,
    kernel: &'a [bool],
    symbol: Vec<C>,
}

impl<'a> Linearization<'a> {
    fn new(chart: &'a TorusChart, data: MetricData, kernel: &'a [bool]) -> Self {
        let n = data.n;
        let nodes = chart.node_count();
        let mut avg = vec![C::new(0.0, 0.0); n * n];
        for (c, a) in avg.iter_mut().enumerate() {
            *a = data.ginv[c].iter().sum::<C>() / nodes as f64;
        }
        let symbol = (0..nodes)
            .map(|m| {
                let mut s = C::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        s += avg[j * n + i] * chart.symbol_d(i)[m] * chart.symbol_db(j)[m];
                    }
                }
                s
            })
            .collect();
        Linearization { chart, data, kernel, symbol }
    }

    /// `v -> Q Lap'(P Q v) - mean(v) + (I - Q) v`, where `P` removes the mean
    /// and `Q` removes the kernel modes.
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let nodes = v.len() as f64;
        let vh = fft_real(self.chart, v);
        let mean = vh[0].re / nodes;
        let mut uh = vh.clone();
        uh[0] = C::new(0.0, 0.0);
        for (u, &k) in uh.iter_mut().zip(self.kernel) {
            if k {
                *u = C::new(0.0, 0.0);
            }
        }
        let u = ifft_real(self.chart, uh);
        let lap = self.data.laplacian_of(&u);
        let mut lh = fft_real(self.chart, &lap);
        lh[0] -= C::new(mean * nodes, 0.0);
        for m in 0..lh.len() {
            if self.kernel[m] {
                lh[m] = vh[m];
            }
        }
        ifft_real(self.chart, lh)
    }

    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        let mut h = fft_real(self.chart, r);
        for m in 0..h.len() {
            if m == 0 {
                h[m] = -h[m];
            } else if !self.kernel[m] {
                h[m] /= self.symbol[m];
            }
        }
        ifft_real(self.chart, h)
    }
}

fn project_out(chart: &TorusChart, kernel: &[bool], v: &[f64]) -> Vec<f64> {
    let mut h = fft_real(chart, v);
    for (x, &k) in h.iter_mut().zip(kernel) {
        if k {
            *x = C::new(0.0, 0.0);
        }
    }
    ifft_real(chart, h)
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

struct Stage {
    phi: ScalarField,
    b: f64,
    iterations: usize,
}

/// Newton iterations for `log ratio - F = b` from `(phi, b)`.
fn newton(
    problem: &EllipticProblem,
    mut phi: ScalarField,
    mut b: f64,
    tol: f64,
    opts: &NewtonOptions,
) -> Result<Stage, EllipticError> {
    let chart = problem.omega.chart().clone();
    let kernel = kernel_modes(&chart);
    let eval = |phi: &ScalarField, b: f64| {
        problem.log_ratio_minus_f(phi).map(|(w, r)| {
            let g: Vec<f64> = r.iter().map(|v| v - b).collect();
            (w, g)
        })
    };
    let (mut w, mut g) = eval(&phi, b).ok_or(EllipticError::PositivityLost(f64::NAN))?;
    let mut qg = project_out(&chart, &kernel, &g);
    for it in 0..=opts.max_newton {
        if sup(&g) <= tol {
            return Ok(Stage { phi, b, iterations: it });
        }
        if it == opts.max_newton {
            break;
        }
        let lin = Linearization::new(&chart, MetricData::new(&w)?, &kernel);
        let rhs: Vec<f64> = qg.iter().map(|v| -v).collect();
        let (v, _) = bicgstab(|x| lin.apply(x), |x| lin.precondition(x), &rhs, opts.linear_tol, opts.max_linear);
        let mut vh = fft_real(&chart, &v);
        let db = vh[0].re / v.len() as f64;
        vh[0] = C::new(0.0, 0.0);
        for (x, &k) in vh.iter_mut().zip(&kernel) {
            if k {
                *x = C::new(0.0, 0.0);
            }
        }
        let dphi = ifft_real(&chart, vh);

        let base = sup(&qg);
        let mut lambda = 1.0;
        let mut accepted = false;
        let mut last_min = f64::NAN;
        for _ in 0..30 {
            let trial = ScalarField::new(
                chart.clone(),
                phi.values().iter().zip(&dphi).map(|(p, d)| p + lambda * d).collect(),
            )?;
            let tb = b + lambda * db;
            match eval(&trial, tb) {
                Some((tw, tg)) => {
                    let tq = project_out(&chart, &kernel, &tg);
                    if sup(&tq) < (1.0 - 1e-4 * lambda) * base {
                        phi = trial;
                        b = tb;
                        w = tw;
                        g = tg;
                        qg = tq;
                        accepted = true;
                        break;
                    }
                }
                None => {
                    last_min = crate::geometry::min_eigenvalue(
                        &problem.omega.add(&crate::geometry::i_ddbar(&trial))?,
                    );
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            if last_min.is_finite() && last_min <= 0.0 {
                return Err(EllipticError::PositivityLost(last_min));
            }
            // Kernel-mode content of the residual is out of reach; stop here.
            return Err(EllipticError::NonConvergence {
                method: "newton-continuation",
                iterations: it,
                residual: sup(&g),
            });
        }
    }
    Err(EllipticError::NonConvergence { method: "newton-continuation", iterations: opts.max_newton, residual: sup(&g) })
}

fn scaled(problem: &EllipticProblem, s: f64) -> EllipticProblem {
    EllipticProblem { omega: problem.omega.clone(), f: problem.f.map(|v| v * s), normalization: problem.normalization }
}

impl NewtonContinuation {
    pub fn solve_with(
        &self,
        problem: &EllipticProblem,
        opts: &SolveOptions,
        nopts: &NewtonOptions,
    ) -> Result<EllipticSolution, EllipticError> {
        let zero = ScalarField::zeros(problem.omega.chart().clone());
        if let Ok(st) = newton(problem, zero.clone(), problem.kahler_b(), opts.tolerance, nopts) {
            return Ok(EllipticSolution::finish(problem, &st.phi, st.b, self.name(), st.iterations));
        }
        // Continuation in F: solve for s F, s = 0 -> 1.
        let mut s = 0.0f64;
        let mut ds = 0.5f64;
        let mut phi = zero;
        let mut b = 0.0;
        let mut total = 0;
        while s < 1.0 {
            let next = (s + ds).min(1.0);
            let sub = scaled(problem, next);
            let tol = if next >= 1.0 { opts.tolerance } else { opts.tolerance.max(1e-8) };
            match newton(&sub, phi.clone(), b, tol, nopts) {
                Ok(st) => {
                    total += st.iterations;
                    phi = st.phi;
                    b = st.b;
                    s = next;
                    ds = (ds * 2.0).min(0.5);
                }
                Err(e) => {
                    ds *= 0.5;
                    if ds < nopts.min_increment {
                        return Err(e);
                    }
                }
            }
        }
        Ok(EllipticSolution::finish(problem, &phi, b, self.name(), total))
    }
}

impl EllipticMethod for NewtonContinuation {
    fn solve(&self, problem: &EllipticProblem, opts: &SolveOptions) -> Result<EllipticSolution, EllipticError> {
        self.solve_with(problem, opts, &NewtonOptions::default())
    }
}
