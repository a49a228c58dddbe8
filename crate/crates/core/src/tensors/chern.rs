use num_complex::Complex64;

use crate::geometry::{
    ensure_same, linalg, spectral, ChartRef, FormField, HermitianMatrixField, MetricField,
    ScalarField,
};

use super::TensorError;

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

/// Per-node inverse metric above this condition number flags a report.
pub const CONDITION_FLAG: f64 = 1e8;

/// Pointwise algebra of a metric: components, inverse and determinant.
///
/// Component arrays are indexed `i * n + j` for `g_{i jbar}` and
/// `j * n + i` for the inverse entry `g^{jbar i}`, so in both cases the
/// stored matrix is the ordinary matrix (inverse).
#[derive(Debug, Clone)]
pub struct MetricData {
    pub chart: ChartRef,
    pub n: usize,
    pub g: Vec<Vec<C>>,
    pub ginv: Vec<Vec<C>>,
    pub det: Vec<f64>,
    pub condition: Vec<f64>,
}

impl MetricData {
    pub fn new(g: &MetricField) -> Result<Self, TensorError> {
        let n = g.dim();
        let chart = g.chart().clone();
        let nodes = chart.node_count();
        let mut ginv = vec![vec![ZERO; nodes]; n * n];
        let mut det = vec![0.0; nodes];
        let mut condition = vec![0.0; nodes];
        for node in 0..nodes {
            let m = g.node(node);
            let ev = linalg::hermitian_eigenvalues(m, n);
            if !(ev[0] > 0.0) {
                return Err(TensorError::NotPositiveDefinite { node, min_eigenvalue: ev[0] });
            }
            condition[node] = ev[n - 1] / ev[0];
            let inv = linalg::inverse(m, n).ok_or(TensorError::NotPositiveDefinite {
                node,
                min_eigenvalue: ev[0],
            })?;
            for c in 0..n * n {
                ginv[c][node] = inv[c];
            }
            det[node] = linalg::hermitian_det(m, n);
        }
        Ok(MetricData { chart, n, g: g.components(), ginv, det, condition })
    }

    pub fn max_condition(&self) -> f64 {
        self.condition.iter().copied().fold(0.0, f64::max)
    }

    pub fn log_det(&self) -> Vec<f64> {
        self.det.iter().map(|d| d.ln()).collect()
    }

    /// `g^{jbar i}` at a node.
    #[inline]
    pub fn inv(&self, j: usize, i: usize, node: usize) -> C {
        self.ginv[j * self.n + i][node]
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, node: usize) -> C {
        self.g[i * self.n + j][node]
    }

    /// `tr_g h = g^{jbar i} h_{i jbar}` for component arrays `h[i * n + j]`.
    pub fn trace_of(&self, h: &[Vec<C>]) -> Vec<f64> {
        let n = self.n;
        let nodes = self.chart.node_count();
        (0..nodes)
            .map(|node| {
                let mut s = ZERO;
                for i in 0..n {
                    for j in 0..n {
                        s += self.ginv[j * n + i][node] * h[i * n + j][node];
                    }
                }
                s.re
            })
            .collect()
    }

    /// Complex Laplacian `g^{jbar i} d_i dbar_j f`.
    pub fn laplacian_of(&self, f: &[f64]) -> Vec<f64> {
        let hess = spectral::ddbar_components(&self.chart, f);
        self.trace_of(&hess)
    }
}

/// Metric plus first derivatives.
#[derive(Debug, Clone)]
pub struct MetricJetField {
    pub data: MetricData,
    /// `d_k g_{i jbar}` at index `(k * n + i) * n + j`.
    pub dg: Vec<Vec<C>>,
    /// `dbar_l g_{i jbar}` at index `(l * n + i) * n + j`.
    pub dbg: Vec<Vec<C>>,
}

impl MetricJetField {
    pub fn new(g: &MetricField) -> Result<Self, TensorError> {
        let data = MetricData::new(g)?;
        let n = data.n;
        let nodes = data.chart.node_count();
        let mut dg = vec![Vec::new(); n * n * n];
        let mut dbg = vec![Vec::new(); n * n * n];
        for i in 0..n {
            for j in 0..n {
                let (d, db) = spectral::gradient(&data.chart, &data.g[i * n + j]);
                for (k, (dk, dbk)) in d.into_iter().zip(db).enumerate() {
                    dg[(k * n + i) * n + j] = dk;
                    dbg[(k * n + i) * n + j] = dbk;
                }
            }
        }
        debug_assert!(dg.iter().all(|c| c.len() == nodes));
        Ok(MetricJetField { data, dg, dbg })
    }
}

/// Christoffel symbols `Gamma^k_{ij} = g^{qbar k} d_i g_{j qbar}`.
#[derive(Debug, Clone)]
pub struct ConnectionField {
    chart: ChartRef,
    n: usize,
    comps: Vec<Vec<C>>,
}

/// Torsion `T^k_{ij} = Gamma^k_{ij} - Gamma^k_{ji}`.
#[derive(Debug, Clone)]
pub struct TorsionField {
    chart: ChartRef,
    n: usize,
    comps: Vec<Vec<C>>,
}

/// Curvature `R_{k lbar i}^p = -dbar_l Gamma^p_{ki}` and its lowering
/// `R_{k lbar i jbar} = g_{p jbar} R_{k lbar i}^p`.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    chart: ChartRef,
    n: usize,
    up: Vec<Vec<C>>,
    low: Vec<Vec<C>>,
}

macro_rules! rank3_accessors {
    ($t:ty) => {
        impl $t {
            pub fn chart(&self) -> &ChartRef {
                &self.chart
            }

            pub fn dim(&self) -> usize {
                self.n
            }

            /// Component with upper index `k` and lower indices `i, j`.
            pub fn get(&self, k: usize, i: usize, j: usize) -> &[C] {
                &self.comps[(k * self.n + i) * self.n + j]
            }

            /// Largest component modulus.
            pub fn sup_abs(&self) -> f64 {
                sup_abs(&self.comps)
            }
        }
    };
}

rank3_accessors!(ConnectionField);
rank3_accessors!(TorsionField);

impl CurvatureField {
    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `R_{k lbar i}^p`
    pub fn mixed(&self, k: usize, l: usize, i: usize, p: usize) -> &[C] {
        let n = self.n;
        &self.up[((k * n + l) * n + i) * n + p]
    }

    /// `R_{k lbar i jbar}`
    pub fn lowered(&self, k: usize, l: usize, i: usize, j: usize) -> &[C] {
        let n = self.n;
        &self.low[((k * n + l) * n + i) * n + j]
    }

    pub fn sup_abs(&self) -> f64 {
        sup_abs(&self.low)
    }
}

pub(crate) fn sup_abs(comps: &[Vec<C>]) -> f64 {
    comps
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |a, v| a.max(v.norm()))
}

/// Full Chern data of one metric.
#[derive(Debug, Clone)]
pub struct ChernGeometry {
    pub jet: MetricJetField,
    pub connection: ConnectionField,
    pub torsion: TorsionField,
    pub curvature: CurvatureField,
}

impl ChernGeometry {
    pub fn new(g: &MetricField) -> Result<Self, TensorError> {
        let jet = MetricJetField::new(g)?;
        let md = &jet.data;
        let n = md.n;
        let nodes = md.chart.node_count();
        let idx3 = |a: usize, b: usize, c: usize| (a * n + b) * n + c;

        let mut gamma = vec![vec![ZERO; nodes]; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let out = &mut gamma[idx3(k, i, j)];
                    for q in 0..n {
                        let inv = &md.ginv[q * n + k];
                        let d = &jet.dg[idx3(i, j, q)];
                        for node in 0..nodes {
                            out[node] += inv[node] * d[node];
                        }
                    }
                }
            }
        }
        let mut torsion = vec![vec![ZERO; nodes]; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    torsion[idx3(k, i, j)] = gamma[idx3(k, i, j)]
                        .iter()
                        .zip(&gamma[idx3(k, j, i)])
                        .map(|(a, b)| a - b)
                        .collect();
                }
            }
        }
        // R_{k lbar i}^p = -dbar_l Gamma^p_{ki}
        let mut up = vec![Vec::new(); n * n * n * n];
        for p in 0..n {
            for k in 0..n {
                for i in 0..n {
                    let db = spectral::dbar(&md.chart, &gamma[idx3(p, k, i)]);
                    for (l, d) in db.into_iter().enumerate() {
                        up[((k * n + l) * n + i) * n + p] = d.into_iter().map(|v| -v).collect();
                    }
                }
            }
        }
        let mut low = vec![vec![ZERO; nodes]; n * n * n * n];
        for k in 0..n {
            for l in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let out = &mut low[((k * n + l) * n + i) * n + j];
                        for p in 0..n {
                            let r = &up[((k * n + l) * n + i) * n + p];
                            let gp = &md.g[p * n + j];
                            for node in 0..nodes {
                                out[node] += gp[node] * r[node];
                            }
                        }
                    }
                }
            }
        }
        let chart = md.chart.clone();
        Ok(ChernGeometry {
            connection: ConnectionField { chart: chart.clone(), n, comps: gamma },
            torsion: TorsionField { chart: chart.clone(), n, comps: torsion },
            curvature: CurvatureField { chart, n, up, low },
            jet,
        })
    }

    pub fn data(&self) -> &MetricData {
        &self.jet.data
    }

    /// Curvature trace `g^{jbar i} R_{k lbar i jbar}` (second Chern-Ricci
    /// route, independent of the log-determinant formula).
    pub fn ricci_from_curvature(&self) -> FormField {
        let md = self.data();
        let n = md.n;
        let nodes = md.chart.node_count();
        let mut comps = vec![vec![ZERO; nodes]; n * n];
        for k in 0..n {
            for l in 0..n {
                let out = &mut comps[k * n + l];
                for i in 0..n {
                    for j in 0..n {
                        let r = self.curvature.lowered(k, l, i, j);
                        let inv = &md.ginv[j * n + i];
                        for node in 0..nodes {
                            out[node] += inv[node] * r[node];
                        }
                    }
                }
            }
        }
        hermitian_from(md.chart.clone(), &comps)
    }
}

pub(crate) fn hermitian_from(chart: ChartRef, comps: &[Vec<C>]) -> HermitianMatrixField {
    let n = chart.complex_dim();
    let nodes = chart.node_count();
    let mut data = vec![ZERO; nodes * n * n];
    for (c, comp) in comps.iter().enumerate() {
        for (node, v) in comp.iter().enumerate() {
            data[node * n * n + c] = *v;
        }
    }
    for block in data.chunks_mut(n * n) {
        linalg::hermitize(block, n);
    }
    HermitianMatrixField::new(chart, data).expect("symmetrized field")
}

/// `Ric(omega)_{k lbar} = -d_k dbar_l log det g`.
pub fn chern_ricci(g: &MetricField) -> Result<FormField, TensorError> {
    let md = MetricData::new(g)?;
    Ok(ricci_of_log_det(&md.chart, &md.log_det()))
}

pub(crate) fn ricci_of_log_det(chart: &ChartRef, log_det: &[f64]) -> FormField {
    let comps: Vec<Vec<C>> = spectral::ddbar_components(chart, log_det)
        .into_iter()
        .map(|c| c.into_iter().map(|v| -v).collect())
        .collect();
    HermitianMatrixField::from_components(chart.clone(), &comps).expect("Hermitian Hessian")
}

pub fn connection_torsion_curvature(
    g: &MetricField,
) -> Result<(ConnectionField, TorsionField, CurvatureField), TensorError> {
    let geo = ChernGeometry::new(g)?;
    Ok((geo.connection, geo.torsion, geo.curvature))
}

/// What [`trace_and_laplacian`] acts on.
#[derive(Debug, Clone, Copy)]
pub enum TraceTarget<'a> {
    /// `tr_g h = g^{jbar i} h_{i jbar}`
    Form(&'a HermitianMatrixField),
    /// `Delta f = g^{jbar i} d_i dbar_j f`
    Function(&'a ScalarField),
}

pub fn trace_and_laplacian(g: &MetricField, target: TraceTarget<'_>) -> Result<ScalarField, TensorError> {
    let md = MetricData::new(g)?;
    let values = match target {
        TraceTarget::Form(h) => {
            ensure_same(g.chart(), h.chart())?;
            md.trace_of(&h.components())
        }
        TraceTarget::Function(f) => {
            ensure_same(g.chart(), f.chart())?;
            md.laplacian_of(f.values())
        }
    };
    Ok(ScalarField::new(md.chart.clone(), values)?)
}
