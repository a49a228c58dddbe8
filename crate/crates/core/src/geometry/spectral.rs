//! Fourier differentiation on torus charts.
//!
//! All derivatives act on the trigonometric interpolant. First-derivative
//! symbols zero the Nyquist mode, and higher derivatives are products of
//! first-derivative symbols, so mixed partials commute exactly.

use num_complex::Complex64;

use super::chart::TorusChart;

/// One complex Wirtinger derivative direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wirtinger {
    /// `d/dz_k`
    D(usize),
    /// `d/dzbar_k`
    Db(usize),
}

/// Fourier coefficients of one complex node array.
pub struct Modes<'a> {
    chart: &'a TorusChart,
    hat: Vec<Complex64>,
}

impl<'a> Modes<'a> {
    pub fn of_complex(chart: &'a TorusChart, values: &[Complex64]) -> Self {
        let mut hat = values.to_vec();
        chart.fft(&mut hat, false);
        Modes { chart, hat }
    }

    pub fn of_real(chart: &'a TorusChart, values: &[f64]) -> Self {
        let mut hat: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        chart.fft(&mut hat, false);
        Modes { chart, hat }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.hat
    }

    /// Applies a product of Wirtinger derivatives and returns node values.
    pub fn derivative(&self, ops: &[Wirtinger]) -> Vec<Complex64> {
        let mut out = self.hat.clone();
        for op in ops {
            let sym = match *op {
                Wirtinger::D(k) => self.chart.symbol_d(k),
                Wirtinger::Db(k) => self.chart.symbol_db(k),
            };
            for (v, s) in out.iter_mut().zip(sym) {
                *v *= s;
            }
        }
        self.chart.fft(&mut out, true);
        out
    }

    /// Derivative of the given order along one active real axis.
    pub fn axis_derivative(&self, slot: usize, order: u32) -> Vec<Complex64> {
        let kv = self.chart.wavenumbers(slot);
        let mut out = self.hat.clone();
        for (v, &k) in out.iter_mut().zip(kv) {
            *v *= Complex64::new(0.0, k).powu(order);
        }
        self.chart.fft(&mut out, true);
        out
    }
}

/// All first Wirtinger derivatives of a complex node array:
/// `(d/dz_k f, d/dzbar_k f)` for every `k`.
pub fn gradient(chart: &TorusChart, values: &[Complex64]) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
    let n = chart.complex_dim();
    let modes = Modes::of_complex(chart, values);
    let d = (0..n).map(|k| modes.derivative(&[Wirtinger::D(k)])).collect();
    let db = (0..n).map(|k| modes.derivative(&[Wirtinger::Db(k)])).collect();
    (d, db)
}

/// Only the antiholomorphic derivatives `d/dzbar_l f`.
pub fn dbar(chart: &TorusChart, values: &[Complex64]) -> Vec<Vec<Complex64>> {
    let modes = Modes::of_complex(chart, values);
    (0..chart.complex_dim())
        .map(|l| modes.derivative(&[Wirtinger::Db(l)]))
        .collect()
}

/// Only the holomorphic derivatives `d/dz_k f`.
pub fn del(chart: &TorusChart, values: &[Complex64]) -> Vec<Vec<Complex64>> {
    let modes = Modes::of_complex(chart, values);
    (0..chart.complex_dim())
        .map(|k| modes.derivative(&[Wirtinger::D(k)]))
        .collect()
}

/// Complex Hessian components `d_i dbar_j f` of a real array, indexed
/// `i * n + j`. Only the upper triangle is transformed; the rest follows
/// from Hermitian symmetry.
pub fn ddbar_components(chart: &TorusChart, values: &[f64]) -> Vec<Vec<Complex64>> {
    let n = chart.complex_dim();
    let modes = Modes::of_real(chart, values);
    let mut out = vec![Vec::new(); n * n];
    for i in 0..n {
        for j in i..n {
            let c = modes.derivative(&[Wirtinger::D(i), Wirtinger::Db(j)]);
            if i == j {
                out[i * n + i] = c.iter().map(|v| Complex64::new(v.re, 0.0)).collect();
            } else {
                out[j * n + i] = c.iter().map(|v| v.conj()).collect();
                out[i * n + j] = c;
            }
        }
    }
    out
}

/// Solves `sum_k d_k dbar_k u = rhs` for a mean-zero `u`; the mean of `rhs`
/// and any Nyquist-only content are discarded.
pub fn inverse_flat_laplacian(chart: &TorusChart, rhs: &[f64]) -> Vec<f64> {
    let n = chart.complex_dim();
    let modes = Modes::of_real(chart, rhs);
    let mut hat = modes.hat;
    for (m, v) in hat.iter_mut().enumerate() {
        let mut sym = Complex64::new(0.0, 0.0);
        for k in 0..n {
            sym += chart.symbol_d(k)[m] * chart.symbol_db(k)[m];
        }
        if sym.norm() < 1e-300 {
            *v = Complex64::new(0.0, 0.0);
        } else {
            *v /= sym;
        }
    }
    chart.fft(&mut hat, true);
    hat.iter().map(|v| v.re).collect()
}

/// Fraction of spectral energy carried by modes whose index along some
/// active axis lies in the top third of that axis's band.
pub fn top_third_energy_fraction(chart: &TorusChart, values: &[f64]) -> f64 {
    let modes = Modes::of_real(chart, values);
    let shape = chart.shape();
    let mut total = 0.0;
    let mut top = 0.0;
    for (node, c) in modes.hat.iter().enumerate() {
        let e = c.norm_sqr();
        total += e;
        let mut rem = node;
        let mut high = false;
        for d in (0..shape.len()).rev() {
            let len = shape[d];
            let m = rem % len;
            rem /= len;
            let signed = if m > len / 2 { len - m } else { m };
            if 3 * signed > len {
                high = true;
            }
        }
        if high {
            top += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        top / total
    }
}
