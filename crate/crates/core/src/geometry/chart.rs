use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::GeometryError;

/// Largest complex dimension the kernel supports (snapshot headers pack
/// one nibble per real axis).
pub const MAX_COMPLEX_DIM: usize = 4;

/// Periodic chart on a flat complex torus.
///
/// Real axis `2k` is `Re z_{k+1}` and axis `2k + 1` is `Im z_{k+1}`. Fields
/// vary only along `active_axes`; node storage is row-major over the active
/// axes in ascending order, with the last active axis fastest.
pub struct TorusChart {
    n: usize,
    resolution: Vec<usize>,
    periods: Vec<f64>,
    active: Vec<usize>,
    shape: Vec<usize>,
    nodes: usize,
    plans: Vec<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
    /// Per-node Fourier symbols of the holomorphic and antiholomorphic
    /// derivatives, `[k][mode]`.
    sym_d: Vec<Vec<Complex64>>,
    sym_db: Vec<Vec<Complex64>>,
    /// Per-node angular wavenumber along each active axis, Nyquist zeroed.
    wave: Vec<Vec<f64>>,
}

pub type ChartRef = Arc<TorusChart>;

impl TorusChart {
    pub fn new(
        n: usize,
        resolution: Vec<usize>,
        periods: Vec<f64>,
        mut active_axes: Vec<usize>,
    ) -> Result<ChartRef, GeometryError> {
        if n == 0 || n > MAX_COMPLEX_DIM {
            return Err(GeometryError::InvalidChart(format!(
                "complex dimension {n} outside 1..={MAX_COMPLEX_DIM}"
            )));
        }
        if resolution.len() != 2 * n || periods.len() != 2 * n {
            return Err(GeometryError::InvalidChart(format!(
                "expected {} resolution and period entries",
                2 * n
            )));
        }
        for &r in &resolution {
            if r < 8 || !r.is_power_of_two() {
                return Err(GeometryError::InvalidChart(format!(
                    "resolution {r} is not a power of two >= 8"
                )));
            }
        }
        for &p in &periods {
            if !(p.is_finite() && p > 0.0) {
                return Err(GeometryError::InvalidChart(format!("period {p} not positive")));
            }
        }
        active_axes.sort_unstable();
        active_axes.dedup();
        if active_axes.iter().any(|&a| a >= 2 * n) {
            return Err(GeometryError::InvalidChart("active axis out of range".into()));
        }
        let shape: Vec<usize> = active_axes.iter().map(|&a| resolution[a]).collect();
        let nodes = shape.iter().product::<usize>();

        let mut planner = FftPlanner::new();
        let plans = shape
            .iter()
            .map(|&len| (planner.plan_fft_forward(len), planner.plan_fft_inverse(len)))
            .collect();

        let mut wave = vec![vec![0.0; nodes]; active_axes.len()];
        for node in 0..nodes {
            let idx = unravel(node, &shape);
            for (slot, &axis) in active_axes.iter().enumerate() {
                let len = shape[slot] as isize;
                let m = idx[slot] as isize;
                let signed = if m > len / 2 { m - len } else { m };
                let k = if 2 * m == len {
                    0.0
                } else {
                    2.0 * std::f64::consts::PI * signed as f64 / periods[axis]
                };
                wave[slot][node] = k;
            }
        }
        let mut sym_d = vec![vec![Complex64::new(0.0, 0.0); nodes]; n];
        let mut sym_db = vec![vec![Complex64::new(0.0, 0.0); nodes]; n];
        for k in 0..n {
            let sx = active_axes.iter().position(|&a| a == 2 * k);
            let sy = active_axes.iter().position(|&a| a == 2 * k + 1);
            for node in 0..nodes {
                let kx = sx.map_or(0.0, |s| wave[s][node]);
                let ky = sy.map_or(0.0, |s| wave[s][node]);
                // d/dz = (d/dx - i d/dy)/2 and d/dx -> i kx, d/dy -> i ky.
                sym_d[k][node] = Complex64::new(0.5 * ky, 0.5 * kx);
                sym_db[k][node] = Complex64::new(-0.5 * ky, 0.5 * kx);
            }
        }

        Ok(Arc::new(TorusChart {
            n,
            resolution,
            periods,
            active: active_axes,
            shape,
            nodes,
            plans,
            sym_d,
            sym_db,
            wave,
        }))
    }

    /// Square chart: every axis has the same resolution and period.
    pub fn uniform(
        n: usize,
        resolution: usize,
        period: f64,
        active_axes: Vec<usize>,
    ) -> Result<ChartRef, GeometryError> {
        Self::new(n, vec![resolution; 2 * n], vec![period; 2 * n], active_axes)
    }

    pub fn complex_dim(&self) -> usize {
        self.n
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    pub fn active_axes(&self) -> &[usize] {
        &self.active
    }

    pub fn is_active(&self, axis: usize) -> bool {
        self.active.contains(&axis)
    }

    /// Node counts along the active axes.
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    /// Lebesgue measure of the full fundamental cell (all 2n axes).
    pub fn cell_volume(&self) -> f64 {
        self.periods.iter().product()
    }

    /// Real coordinates of a node; inactive axes sit at 0.
    pub fn coordinates(&self, node: usize) -> Vec<f64> {
        let idx = unravel(node, &self.shape);
        let mut x = vec![0.0; 2 * self.n];
        for (slot, &axis) in self.active.iter().enumerate() {
            x[axis] = idx[slot] as f64 * self.periods[axis] / self.resolution[axis] as f64;
        }
        x
    }

    /// Smallest grid spacing over the active axes.
    pub fn min_spacing(&self) -> f64 {
        self.active
            .iter()
            .map(|&a| self.periods[a] / self.resolution[a] as f64)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest value of `sum_k |d/dz_k symbol|^2` over the Fourier modes.
    pub fn max_wirtinger_symbol(&self) -> f64 {
        self.active
            .iter()
            .map(|&a| {
                let kmax = std::f64::consts::PI * (self.resolution[a] as f64 - 2.0) / self.periods[a];
                0.25 * kmax * kmax
            })
            .sum()
    }

    /// Grid label such as `64x64`.
    pub fn grid_label(&self) -> String {
        if self.shape.is_empty() {
            return "1".into();
        }
        self.shape
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join("x")
    }

    pub(crate) fn same_as(&self, other: &TorusChart) -> bool {
        std::ptr::eq(self, other)
            || (self.n == other.n
                && self.resolution == other.resolution
                && self.periods == other.periods
                && self.active == other.active)
    }

    pub(crate) fn symbol_d(&self, k: usize) -> &[Complex64] {
        &self.sym_d[k]
    }

    pub(crate) fn symbol_db(&self, k: usize) -> &[Complex64] {
        &self.sym_db[k]
    }

    pub(crate) fn wavenumbers(&self, slot: usize) -> &[f64] {
        &self.wave[slot]
    }

    /// In-place multidimensional FFT over the active axes.
    pub(crate) fn fft(&self, data: &mut [Complex64], inverse: bool) {
        debug_assert_eq!(data.len(), self.nodes);
        let dims = self.shape.len();
        let mut line = Vec::new();
        for d in 0..dims {
            let len = self.shape[d];
            let stride: usize = self.shape[d + 1..].iter().product();
            let outer = self.nodes / (len * stride);
            let plan = if inverse { &self.plans[d].1 } else { &self.plans[d].0 };
            line.resize(len, Complex64::new(0.0, 0.0));
            let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
            for o in 0..outer {
                let base = o * len * stride;
                for s in 0..stride {
                    for (m, v) in line.iter_mut().enumerate() {
                        *v = data[base + m * stride + s];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (m, v) in line.iter().enumerate() {
                        data[base + m * stride + s] = *v;
                    }
                }
            }
        }
        if inverse {
            let scale = 1.0 / self.nodes as f64;
            for v in data.iter_mut() {
                *v *= scale;
            }
        }
    }
}

impl fmt::Debug for TorusChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusChart")
            .field("n", &self.n)
            .field("resolution", &self.resolution)
            .field("periods", &self.periods)
            .field("active_axes", &self.active)
            .finish()
    }
}

fn unravel(mut node: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for d in (0..shape.len()).rev() {
        idx[d] = node % shape[d];
        node /= shape[d];
    }
    idx
}
