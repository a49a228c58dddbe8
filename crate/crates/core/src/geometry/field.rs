use num_complex::Complex64;

use super::chart::ChartRef;
use super::linalg;
use super::spectral::{self, Modes};
use super::GeometryError;

type C = Complex64;

/// Hermitian symmetrization may correct entries by at most this much
/// (relative to the field's largest entry, floored at 1).
pub const HERMITIAN_TOLERANCE: f64 = 1e-13;

/// Real value per node.
#[derive(Debug, Clone)]
pub struct ScalarField {
    chart: ChartRef,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(chart: ChartRef, values: Vec<f64>) -> Result<Self, GeometryError> {
        if values.len() != chart.node_count() {
            return Err(GeometryError::ShapeMismatch {
                expected: chart.node_count(),
                found: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite(*v));
        }
        Ok(ScalarField { chart, values })
    }

    pub fn zeros(chart: ChartRef) -> Self {
        let len = chart.node_count();
        ScalarField { chart, values: vec![0.0; len] }
    }

    pub fn constant(chart: ChartRef, c: f64) -> Self {
        let len = chart.node_count();
        ScalarField { chart, values: vec![c; len] }
    }

    /// Samples `f(x)` at every node, where `x` holds all 2n real coordinates.
    pub fn from_fn(chart: ChartRef, f: impl Fn(&[f64]) -> f64) -> Result<Self, GeometryError> {
        let values = (0..chart.node_count()).map(|i| f(&chart.coordinates(i))).collect();
        Self::new(chart, values)
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            chart: self.chart.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(
        &self,
        other: &ScalarField,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<ScalarField, GeometryError> {
        ensure_same(&self.chart, &other.chart)?;
        Ok(ScalarField {
            chart: self.chart.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Share of spectral energy in the top third of each axis's band.
    pub fn top_third_energy_fraction(&self) -> f64 {
        spectral::top_third_energy_fraction(&self.chart, &self.values)
    }
}

/// An `n x n` Hermitian matrix per node, stored node-major and row-major
/// within a node: entry `(i, j)` is `g_{i jbar}`.
#[derive(Debug, Clone)]
pub struct HermitianMatrixField {
    chart: ChartRef,
    data: Vec<C>,
}

/// Positive-definite Hermitian field (g, g0, ghat, ...).
pub type MetricField = HermitianMatrixField;
/// Hermitian, not necessarily definite, field (Ric, chi, alpha_t, ...).
pub type FormField = HermitianMatrixField;

impl HermitianMatrixField {
    /// Builds a field from node-major data, averaging with the conjugate
    /// transpose. Fails if the correction exceeds [`HERMITIAN_TOLERANCE`].
    pub fn new(chart: ChartRef, mut data: Vec<C>) -> Result<Self, GeometryError> {
        let n = chart.complex_dim();
        let expected = chart.node_count() * n * n;
        if data.len() != expected {
            return Err(GeometryError::ShapeMismatch { expected, found: data.len() });
        }
        if data.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(GeometryError::NonFinite(f64::NAN));
        }
        let scale = data.iter().fold(1.0f64, |a, v| a.max(v.norm()));
        let mut worst = 0.0f64;
        for block in data.chunks_mut(n * n) {
            worst = worst.max(linalg::hermitize(block, n));
        }
        if worst > HERMITIAN_TOLERANCE * scale {
            return Err(GeometryError::NotHermitian(worst));
        }
        Ok(HermitianMatrixField { chart, data })
    }

    /// Builds a field from component arrays indexed `i * n + j`.
    pub fn from_components(chart: ChartRef, comps: &[Vec<C>]) -> Result<Self, GeometryError> {
        let n = chart.complex_dim();
        let nodes = chart.node_count();
        let mut data = vec![C::new(0.0, 0.0); nodes * n * n];
        for (c, comp) in comps.iter().enumerate() {
            for (node, v) in comp.iter().enumerate() {
                data[node * n * n + c] = *v;
            }
        }
        Self::new(chart, data)
    }

    pub fn constant(chart: ChartRef, matrix: &[C]) -> Result<Self, GeometryError> {
        let nodes = chart.node_count();
        let mut data = Vec::with_capacity(nodes * matrix.len());
        for _ in 0..nodes {
            data.extend_from_slice(matrix);
        }
        Self::new(chart, data)
    }

    pub fn identity(chart: ChartRef) -> Self {
        let n = chart.complex_dim();
        Self::constant(chart, &linalg::identity(n)).expect("identity is Hermitian")
    }

    pub fn zeros(chart: ChartRef) -> Self {
        let n = chart.complex_dim();
        let len = chart.node_count() * n * n;
        HermitianMatrixField { chart, data: vec![C::new(0.0, 0.0); len] }
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.complex_dim()
    }

    pub fn data(&self) -> &[C] {
        &self.data
    }

    /// Matrix at one node.
    pub fn node(&self, node: usize) -> &[C] {
        let nn = self.dim() * self.dim();
        &self.data[node * nn..(node + 1) * nn]
    }

    /// Component `(i, j)` over all nodes.
    pub fn component(&self, i: usize, j: usize) -> Vec<C> {
        let n = self.dim();
        self.data.chunks(n * n).map(|m| m[i * n + j]).collect()
    }

    /// All components, indexed `i * n + j`.
    pub fn components(&self) -> Vec<Vec<C>> {
        let n = self.dim();
        (0..n * n).map(|c| self.data.chunks(n * n).map(|m| m[c]).collect()).collect()
    }

    pub fn add(&self, other: &HermitianMatrixField) -> Result<Self, GeometryError> {
        self.combine(other, 1.0, 1.0)
    }

    pub fn sub(&self, other: &HermitianMatrixField) -> Result<Self, GeometryError> {
        self.combine(other, 1.0, -1.0)
    }

    /// `a * self + b * other`.
    pub fn combine(&self, other: &HermitianMatrixField, a: f64, b: f64) -> Result<Self, GeometryError> {
        ensure_same(&self.chart, &other.chart)?;
        Ok(HermitianMatrixField {
            chart: self.chart.clone(),
            data: self.data.iter().zip(&other.data).map(|(x, y)| x * a + y * b).collect(),
        })
    }

    pub fn scale(&self, a: f64) -> Self {
        HermitianMatrixField {
            chart: self.chart.clone(),
            data: self.data.iter().map(|x| x * a).collect(),
        }
    }

    /// Pointwise product with a positive scalar field.
    pub fn scale_by(&self, f: &ScalarField) -> Result<Self, GeometryError> {
        ensure_same(&self.chart, f.chart())?;
        let nn = self.dim() * self.dim();
        let mut data = self.data.clone();
        for (block, &v) in data.chunks_mut(nn).zip(f.values()) {
            for x in block {
                *x *= v;
            }
        }
        Ok(HermitianMatrixField { chart: self.chart.clone(), data })
    }

    /// Largest entry modulus over all nodes.
    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0f64, |a, v| a.max(v.norm()))
    }

    /// Per-node determinant (real for Hermitian input).
    pub fn determinant(&self) -> Vec<f64> {
        let n = self.dim();
        self.data.chunks(n * n).map(|m| linalg::hermitian_det(m, n)).collect()
    }

    /// Per-node smallest and largest eigenvalues.
    pub fn eigen_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim();
        let mut lo = Vec::with_capacity(self.chart.node_count());
        let mut hi = Vec::with_capacity(self.chart.node_count());
        for m in self.data.chunks(n * n) {
            let ev = linalg::hermitian_eigenvalues(m, n);
            lo.push(ev[0]);
            hi.push(ev[n - 1]);
        }
        (lo, hi)
    }

    /// Mean of each component over the chart, indexed `i * n + j`.
    pub fn component_means(&self) -> Vec<C> {
        let n = self.dim();
        let nodes = self.chart.node_count() as f64;
        let mut out = vec![C::new(0.0, 0.0); n * n];
        for m in self.data.chunks(n * n) {
            for (o, v) in out.iter_mut().zip(m) {
                *o += v;
            }
        }
        out.iter().map(|v| v / nodes).collect()
    }
}

/// Strictly positive density per node (the volume form `Omega` relative
/// to Lebesgue measure).
#[derive(Debug, Clone)]
pub struct VolumeField {
    chart: ChartRef,
    values: Vec<f64>,
}

impl VolumeField {
    pub fn new(chart: ChartRef, values: Vec<f64>) -> Result<Self, GeometryError> {
        let field = ScalarField::new(chart, values)?;
        let min = field.min();
        if !(min > 0.0) {
            return Err(GeometryError::NonPositiveVolume(min));
        }
        Ok(VolumeField { chart: field.chart, values: field.values })
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn log(&self) -> ScalarField {
        ScalarField {
            chart: self.chart.clone(),
            values: self.values.iter().map(|v| v.ln()).collect(),
        }
    }
}

/// Field argument for [`spectral_derivative`].
#[derive(Debug, Clone)]
pub enum FieldRef<'a> {
    Scalar(&'a ScalarField),
    Matrix(&'a HermitianMatrixField),
}

/// Derivative result, of the same kind as the input.
#[derive(Debug, Clone)]
pub enum FieldValue {
    Scalar(ScalarField),
    Matrix(HermitianMatrixField),
}

/// Exact derivative of the trigonometric interpolant along a real axis.
pub fn spectral_derivative(
    field: FieldRef<'_>,
    axis: usize,
    order: u32,
) -> Result<FieldValue, GeometryError> {
    if !(order == 1 || order == 2) {
        return Err(GeometryError::InvalidOrder(order));
    }
    let chart = match &field {
        FieldRef::Scalar(f) => f.chart().clone(),
        FieldRef::Matrix(f) => f.chart().clone(),
    };
    let slot = chart
        .active_axes()
        .iter()
        .position(|&a| a == axis)
        .ok_or(GeometryError::InactiveAxis(axis))?;
    match field {
        FieldRef::Scalar(f) => {
            let d = Modes::of_real(&chart, f.values()).axis_derivative(slot, order);
            ScalarField::new(chart, d.iter().map(|v| v.re).collect()).map(FieldValue::Scalar)
        }
        FieldRef::Matrix(f) => {
            let comps: Vec<Vec<C>> = f
                .components()
                .iter()
                .map(|c| Modes::of_complex(&chart, c).axis_derivative(slot, order))
                .collect();
            HermitianMatrixField::from_components(chart, &comps).map(FieldValue::Matrix)
        }
    }
}

/// The complex Hessian `(d_i dbar_j phi)`, i.e. the coefficients of
/// `sqrt(-1) d dbar phi`.
pub fn i_ddbar(phi: &ScalarField) -> HermitianMatrixField {
    let comps = spectral::ddbar_components(phi.chart(), phi.values());
    HermitianMatrixField::from_components(phi.chart().clone(), &comps)
        .expect("spectral complex Hessian of a real field is Hermitian")
}

/// Smallest eigenvalue over all nodes.
pub fn min_eigenvalue(field: &HermitianMatrixField) -> f64 {
    let n = field.dim();
    field
        .data()
        .chunks(n * n)
        .map(|m| linalg::min_eigenvalue(m, n))
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn ensure_same(a: &ChartRef, b: &ChartRef) -> Result<(), GeometryError> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(GeometryError::ChartMismatch)
    }
}
