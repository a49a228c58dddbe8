use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{i_ddbar, min_eigenvalue, ChartRef, HermitianMatrixField, MetricField, ScalarField};

use super::ModelError;

type C = Complex64;

/// One Fourier perturbation `amplitude * cos(2 pi <wave, x / L> + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    /// Matrix entry `(i, j)` receiving the mode (ignored for Kähler recipes).
    pub component: (usize, usize),
    /// `[re, im]`; diagonal entries require `im = 0`.
    pub amplitude: [f64; 2],
    /// Integer wavenumber per real axis (zero on inactive axes).
    pub wave: Vec<i32>,
    #[serde(default)]
    pub phase: f64,
}

impl Perturbation {
    fn angle(&self, x: &[f64], periods: &[f64]) -> f64 {
        self.wave
            .iter()
            .zip(x.iter().zip(periods))
            .map(|(&w, (&xa, &l))| 2.0 * PI * w as f64 * xa / l)
            .sum::<f64>()
            + self.phase
    }
}

/// Recipe for a metric on a torus chart: a constant Hermitian base plus
/// Fourier perturbations. With `kahler` set the perturbations are modes of
/// a potential `psi` and the metric is `base + i ddbar psi`; otherwise they
/// are added entrywise (and generically carry torsion).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusMetricRecipe {
    /// Row-major `n x n` base, each entry `[re, im]`.
    pub base: Vec<[f64; 2]>,
    #[serde(default)]
    pub perturbations: Vec<Perturbation>,
    #[serde(default)]
    pub kahler: bool,
}

/// Knobs for [`TorusMetricRecipe::random`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomRecipeOptions {
    pub kahler: bool,
    /// Typical size of a perturbation of the metric entries.
    pub amplitude: f64,
    pub modes: usize,
    pub max_wave: i32,
}

impl Default for RandomRecipeOptions {
    fn default() -> Self {
        RandomRecipeOptions { kahler: false, amplitude: 0.12, modes: 4, max_wave: 2 }
    }
}

impl TorusMetricRecipe {
    pub fn flat(n: usize) -> Self {
        let mut base = vec![[0.0, 0.0]; n * n];
        for i in 0..n {
            base[i * n + i] = [1.0, 0.0];
        }
        TorusMetricRecipe { base, perturbations: Vec::new(), kahler: false }
    }

    fn validate(&self, chart: &ChartRef) -> Result<(), ModelError> {
        let n = chart.complex_dim();
        if self.base.len() != n * n {
            return Err(ModelError::InvalidRecipe(format!("base needs {} entries", n * n)));
        }
        for p in &self.perturbations {
            if p.wave.len() != 2 * n {
                return Err(ModelError::InvalidRecipe(format!("wave needs {} entries", 2 * n)));
            }
            for (axis, &w) in p.wave.iter().enumerate() {
                if w != 0 && !chart.is_active(axis) {
                    return Err(ModelError::InvalidRecipe(format!("wave varies along inactive axis {axis}")));
                }
                let limit = chart.resolution()[axis] as i32 / 3;
                if w.abs() > limit {
                    return Err(ModelError::InvalidRecipe(format!(
                        "wavenumber {w} on axis {axis} is not resolved (limit {limit})"
                    )));
                }
            }
            if !self.kahler {
                let (i, j) = p.component;
                if i >= n || j >= n {
                    return Err(ModelError::InvalidRecipe("component index out of range".into()));
                }
                if i == j && p.amplitude[1] != 0.0 {
                    return Err(ModelError::InvalidRecipe("diagonal amplitude must be real".into()));
                }
            }
        }
        Ok(())
    }

    /// Evaluates the recipe; fails unless the result is positive definite.
    pub fn build(&self, chart: &ChartRef) -> Result<MetricField, ModelError> {
        self.validate(chart)?;
        let n = chart.complex_dim();
        let base: Vec<C> = self.base.iter().map(|e| C::new(e[0], e[1])).collect();
        let base_field = HermitianMatrixField::constant(chart.clone(), &base)?;
        let g = if self.kahler {
            let psi = ScalarField::from_fn(chart.clone(), |x| {
                self.perturbations
                    .iter()
                    .map(|p| p.amplitude[0] * p.angle(x, chart.periods()).cos())
                    .sum()
            })?;
            base_field.add(&i_ddbar(&psi))?
        } else {
            let nodes = chart.node_count();
            let mut data = base_field.data().to_vec();
            for node in 0..nodes {
                let x = chart.coordinates(node);
                for p in &self.perturbations {
                    let (i, j) = p.component;
                    let v = C::new(p.amplitude[0], p.amplitude[1]) * p.angle(&x, chart.periods()).cos();
                    data[node * n * n + i * n + j] += v;
                    if i != j {
                        data[node * n * n + j * n + i] += v.conj();
                    }
                }
            }
            HermitianMatrixField::new(chart.clone(), data)?
        };
        let min = min_eigenvalue(&g);
        if !(min > 0.0) {
            return Err(ModelError::NotPositiveDefinite(min));
        }
        Ok(g)
    }

    /// Seeded random recipe with modes on the active axes; amplitudes are
    /// halved until the metric is positive definite.
    pub fn random(chart: &ChartRef, rng: &mut impl Rng, opts: RandomRecipeOptions) -> Self {
        let n = chart.complex_dim();
        let active = chart.active_axes().to_vec();
        let mut base = vec![[0.0, 0.0]; n * n];
        for i in 0..n {
            base[i * n + i] = [1.0 + rng.gen_range(-0.1..0.1), 0.0];
            for j in i + 1..n {
                let e = [rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1)];
                base[i * n + j] = e;
                base[j * n + i] = [e[0], -e[1]];
            }
        }
        let mut perturbations = Vec::new();
        for _ in 0..opts.modes {
            let mut wave = vec![0; 2 * n];
            while wave.iter().all(|&w| w == 0) {
                for &a in &active {
                    wave[a] = rng.gen_range(-opts.max_wave..=opts.max_wave);
                }
                if active.is_empty() {
                    break;
                }
            }
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(i..n);
            let mut amp = [rng.gen_range(-1.0..1.0) * opts.amplitude, 0.0];
            if !opts.kahler && i != j {
                amp[1] = rng.gen_range(-1.0..1.0) * opts.amplitude;
            }
            if opts.kahler {
                // Hessian size ~ |k|^2 / 4 times the potential amplitude.
                let k2: f64 = wave
                    .iter()
                    .zip(chart.periods())
                    .map(|(&w, &l)| (2.0 * PI * w as f64 / l).powi(2))
                    .sum();
                amp[0] /= (0.25 * k2).max(1.0);
            }
            perturbations.push(Perturbation {
                component: (i, j),
                amplitude: amp,
                wave,
                phase: rng.gen_range(0.0..2.0 * PI),
            });
        }
        let mut recipe = TorusMetricRecipe { base, perturbations, kahler: opts.kahler };
        for _ in 0..40 {
            if recipe.build(chart).is_ok() {
                break;
            }
            for p in &mut recipe.perturbations {
                p.amplitude[0] *= 0.5;
                p.amplitude[1] *= 0.5;
            }
        }
        recipe
    }
}

/// Random band-limited real potential: a sum of `modes` cosines with
/// Hessian entries of size about `amplitude`.
pub fn random_potential(
    chart: &ChartRef,
    rng: &mut impl Rng,
    modes: usize,
    amplitude: f64,
    max_wave: i32,
) -> ScalarField {
    let n = chart.complex_dim();
    let mut terms = Vec::new();
    for _ in 0..modes {
        let mut wave = vec![0i32; 2 * n];
        while wave.iter().all(|&w| w == 0) && !chart.active_axes().is_empty() {
            for &a in chart.active_axes() {
                wave[a] = rng.gen_range(-max_wave..=max_wave);
            }
        }
        let k2: f64 = wave
            .iter()
            .zip(chart.periods())
            .map(|(&w, &l)| (2.0 * PI * w as f64 / l).powi(2))
            .sum();
        let a = rng.gen_range(-1.0..1.0) * amplitude / (0.25 * k2).max(1.0);
        terms.push((wave, a, rng.gen_range(0.0..2.0 * PI)));
    }
    ScalarField::from_fn(chart.clone(), |x| {
        terms
            .iter()
            .map(|(wave, a, ph)| {
                let ang: f64 = wave
                    .iter()
                    .zip(x.iter().zip(chart.periods()))
                    .map(|(&w, (&xa, &l))| 2.0 * PI * w as f64 * xa / l)
                    .sum();
                a * (ang + ph).cos()
            })
            .sum()
    })
    .expect("finite potential")
}

/// Constant Hermitian matrix from `[re, im]` pairs.
pub fn matrix_from_pairs(pairs: &[[f64; 2]]) -> Vec<C> {
    pairs.iter().map(|e| C::new(e[0], e[1])).collect()
}
