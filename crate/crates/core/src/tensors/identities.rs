use num_complex::Complex64;

use crate::geometry::{ensure_same, i_ddbar, linalg, spectral, FormField, MetricField, ScalarField};

use super::chern::{chern_ricci, ChernGeometry, MetricData, MetricJetField, CONDITION_FLAG};
use super::TensorError;

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

/// Largest admissible `d eta` for the trace-evolution check.
pub const CLOSEDNESS_TOLERANCE: f64 = 1e-10;

/// Inputs of the trace-evolution check: `omega = omega0 + t chi + i ddbar phi`
/// measured against the reference `ghat`.
#[derive(Debug, Clone)]
pub struct TraceEvolutionInput {
    pub g0: MetricField,
    pub ghat: MetricField,
    /// Closed real (1,1)-form.
    pub chi: FormField,
    pub phi: ScalarField,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvolutionReport {
    /// `max |LHS - ((I) + (II) + (III))|`
    pub residual: f64,
    /// `max ((I) - bound_I)`
    pub violation_i: f64,
    /// `max ((II) - C tr_g ghat)`
    pub violation_ii: f64,
    /// `max ((III) - C' tr_g ghat)` over nodes with `tr_ghat g >= 1`.
    pub violation_iii: f64,
    pub c_ii: f64,
    pub c_iii: f64,
    /// Nodes where `tr_ghat g < 1` (bound III not applicable).
    pub masked_nodes: usize,
    /// Largest `|d eta|` component seen.
    pub closedness: f64,
    /// Largest `|LHS|`, for scale.
    pub lhs_scale: f64,
    pub condition_flagged: bool,
    pub grid: String,
}

/// Sup of `|d_m eta_{k lbar} - d_k eta_{m lbar}|`; the conjugate half of
/// `d eta` follows by Hermitian symmetry.
pub fn closedness_defect(eta: &FormField) -> f64 {
    let n = eta.dim();
    let chart = eta.chart();
    let comps = eta.components();
    let grads: Vec<Vec<Vec<C>>> = comps.iter().map(|c| spectral::del(chart, c)).collect();
    let mut worst = 0.0f64;
    for m in 0..n {
        for k in 0..n {
            if m == k {
                continue;
            }
            for l in 0..n {
                let a = &grads[k * n + l][m];
                let b = &grads[m * n + l][k];
                for (x, y) in a.iter().zip(b) {
                    worst = worst.max((x - y).norm());
                }
            }
        }
    }
    worst
}

/// Index kinds for tensor norms in a `ghat`-unitary frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Slot {
    Lower,
    LowerBar,
    UpperBar,
}

/// Frame change making `ghat` the identity: `P^T Ghat conj(P) = I` and
/// `Q = P^{-1}`.
pub(crate) struct UnitaryFrame {
    n: usize,
    p: Vec<C>,
    q: Vec<C>,
}

impl UnitaryFrame {
    pub(crate) fn new(ghat: &[C], n: usize) -> Option<Self> {
        let gt: Vec<C> = (0..n * n).map(|c| ghat[c].conj()).collect();
        let l = linalg::cholesky(&gt, n)?;
        let q = linalg::adjoint(&l, n);
        let p = linalg::inverse(&q, n)?;
        Some(UnitaryFrame { n, p, q })
    }

    /// Frame-invariant norm of a tensor given with flat row-major indices.
    pub(crate) fn norm(&self, tensor: &[C], slots: &[Slot]) -> f64 {
        let n = self.n;
        let mut cur = tensor.to_vec();
        let rank = slots.len();
        for (pos, slot) in slots.iter().enumerate() {
            let stride = n.pow((rank - pos - 1) as u32);
            let mut next = vec![ZERO; cur.len()];
            for (flat, out) in next.iter_mut().enumerate() {
                let a = (flat / stride) % n;
                let base = flat - a * stride;
                let mut s = ZERO;
                for x in 0..n {
                    let m = match slot {
                        Slot::Lower => self.p[x * n + a],
                        Slot::LowerBar => self.p[x * n + a].conj(),
                        Slot::UpperBar => self.q[a * n + x].conj(),
                    };
                    s += m * cur[base + x * stride];
                }
                *out = s;
            }
            cur = next;
        }
        cur.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Metric data plus torsion of a background metric (`g0` or `ghat`).
struct Background {
    geo: ChernGeometry,
}

impl Background {
    fn g(&self, i: usize, j: usize, node: usize) -> C {
        self.geo.data().at(i, j, node)
    }
    fn inv(&self, j: usize, i: usize, node: usize) -> C {
        self.geo.data().inv(j, i, node)
    }
    fn torsion(&self, k: usize, i: usize, j: usize, node: usize) -> C {
        self.geo.torsion.get(k, i, j)[node]
    }
    fn gamma(&self, k: usize, i: usize, j: usize, node: usize) -> C {
        self.geo.connection.get(k, i, j)[node]
    }
}

/// Computes both sides of the evolution identity for `log tr_ghat g` under
/// `d g / dt = -Ric(g)`, and the three term bounds.
pub fn verify_trace_evolution(input: &TraceEvolutionInput) -> Result<TraceEvolutionReport, TensorError> {
    let chart = input.g0.chart().clone();
    ensure_same(&chart, input.ghat.chart())?;
    ensure_same(&chart, input.chi.chart())?;
    ensure_same(&chart, input.phi.chart())?;
    let n = chart.complex_dim();
    let nodes = chart.node_count();
    let idx3 = |a: usize, b: usize, c: usize| (a * n + b) * n + c;

    let eta = input.chi.combine(&i_ddbar(&input.phi), input.t, 1.0)?;
    let closedness = closedness_defect(&eta);
    if closedness > CLOSEDNESS_TOLERANCE {
        return Err(TensorError::ClosednessViolated(closedness));
    }
    let g_field = input.g0.add(&eta)?;
    let gj = MetricJetField::new(&g_field)?;
    let gd = &gj.data;
    let hat = Background { geo: ChernGeometry::new(&input.ghat)? };
    let zero = Background { geo: ChernGeometry::new(&input.g0)? };
    let condition_flagged = gd.max_condition() > CONDITION_FLAG
        || hat.geo.data().max_condition() > CONDITION_FLAG
        || zero.geo.data().max_condition() > CONDITION_FLAG;

    // tr_ghat g and its derivatives.
    let tr: Vec<f64> = hat.geo.data().trace_of(&gd.g);
    let log_tr: Vec<f64> = tr.iter().map(|v| v.ln()).collect();
    let lap_log_tr = gd.laplacian_of(&log_tr);
    let tr_c: Vec<C> = tr.iter().map(|&v| C::new(v, 0.0)).collect();
    let (d_tr, db_tr) = spectral::gradient(&chart, &tr_c);
    let ric = chern_ricci(&g_field)?;
    let tr_hat_ric = hat.geo.data().trace_of(&ric.components());

    // dbar_m That^q_{jl}, indexed [m][q][j][l].
    let mut db_that = vec![Vec::new(); n * n * n * n];
    for q in 0..n {
        for j in 0..n {
            for l in 0..n {
                let d = spectral::dbar(&chart, hat.geo.torsion.get(q, j, l));
                for (m, v) in d.into_iter().enumerate() {
                    db_that[((m * n + q) * n + j) * n + l] = v;
                }
            }
        }
    }
    // U_{k jbar lbar} = conj(T0^p_{jl}) g0_{k pbar}, V_{i k jbar} = T0^p_{ik} g0_{p jbar}.
    let mut u = vec![vec![ZERO; nodes]; n * n * n];
    let mut v = vec![vec![ZERO; nodes]; n * n * n];
    for node in 0..nodes {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut su = ZERO;
                    let mut sv = ZERO;
                    for p in 0..n {
                        su += zero.torsion(p, b, c, node).conj() * zero.g(a, p, node);
                        sv += zero.torsion(p, a, b, node) * zero.g(p, c, node);
                    }
                    u[idx3(a, b, c)][node] = su;
                    v[idx3(a, b, c)][node] = sv;
                }
            }
        }
    }
    let du: Vec<Vec<Vec<C>>> = u.iter().map(|c| spectral::del(&chart, c)).collect();
    let dbv: Vec<Vec<Vec<C>>> = v.iter().map(|c| spectral::dbar(&chart, c)).collect();

    let mut residual = 0.0f64;
    let mut lhs_scale = 0.0f64;
    let mut violation_i = f64::NEG_INFINITY;
    let mut term_ii = vec![0.0; nodes];
    let mut term_iii = vec![0.0; nodes];
    let mut tr_g_hat = vec![0.0; nodes];
    let mut c_ii = 0.0f64;
    let mut c_iii = 0.0f64;

    let mut nabla_g = vec![ZERO; n * n * n]; // [k][i][j] nabla_k g_{i jbar}
    let mut nablab_g = vec![ZERO; n * n * n]; // [l][p][q] nabla_lbar g_{p qbar}
    let mut b_tensor = vec![ZERO; n * n * n * n];
    let mut e1 = vec![ZERO; n * n * n * n];
    let mut e2 = vec![ZERO; n * n * n * n];
    let mut e3 = vec![ZERO; n * n * n * n];

    for node in 0..nodes {
        let gi = |j: usize, i: usize| gd.inv(j, i, node);
        let hi = |l: usize, k: usize| hat.inv(l, k, node);
        let trn = tr[node];

        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = gj.dg[idx3(k, i, j)][node];
                    let mut sb = gj.dbg[idx3(k, i, j)][node];
                    for r in 0..n {
                        s -= hat.gamma(r, k, i, node) * gd.at(r, j, node);
                        sb -= hat.gamma(r, k, j, node).conj() * gd.at(i, r, node);
                    }
                    nabla_g[idx3(k, i, j)] = s;
                    nablab_g[idx3(k, i, j)] = sb;
                }
            }
        }

        // (I)
        let mut k_term = ZERO;
        let mut grad_term = ZERO;
        let mut cross = ZERO;
        let mut tt = ZERO;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let h = hi(l, k);
                        for p in 0..n {
                            for q in 0..n {
                                k_term += gi(j, p) * gi(q, i) * h * nabla_g[idx3(k, i, j)] * nablab_g[idx3(l, p, q)];
                                tt += gi(j, i) * h * hat.torsion(p, i, k, node) * hat.torsion(q, j, l, node).conj() * gd.at(p, q, node);
                            }
                            cross += gi(j, i) * h * hat.torsion(p, k, i, node) * nablab_g[idx3(l, p, j)];
                        }
                    }
                }
            }
        }
        for k in 0..n {
            for l in 0..n {
                grad_term += gd.inv(l, k, node) * d_tr[k][node] * db_tr[l][node];
            }
        }
        let term_i = (-k_term + grad_term / trn - 2.0 * cross.re - tt) / trn;

        // (II)
        let mut s2 = ZERO;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for q in 0..n {
                        let mut bt = db_that[((i * n + q) * n + j) * n + l][node].conj();
                        for p in 0..n {
                            bt -= hat.geo.curvature.lowered(i, l, p, j)[node] * hi(q, p);
                        }
                        b_tensor[((i * n + j) * n + l) * n + q] = bt;
                        for k in 0..n {
                            s2 += gi(j, i) * hi(l, k) * bt * gd.at(k, q, node);
                        }
                    }
                }
            }
        }
        let t2 = s2 / trn;

        // (III)
        let mut s3 = ZERO;
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        let mut n1 = du[idx3(k, j, l)][i][node];
                        let mut n2 = dbv[idx3(i, k, j)][l][node];
                        for r in 0..n {
                            n1 -= hat.gamma(r, i, k, node) * u[idx3(r, j, l)][node];
                            n2 -= hat.gamma(r, l, j, node).conj() * v[idx3(i, k, r)][node];
                        }
                        let mut n3 = ZERO;
                        for p in 0..n {
                            for q in 0..n {
                                n3 += hat.torsion(q, j, l, node).conj()
                                    * zero.torsion(p, i, k, node)
                                    * zero.g(p, q, node);
                            }
                        }
                        let w = gi(j, i) * hi(l, k);
                        s3 += w * (n1 + n2 - n3);
                        let flat = ((i * n + k) * n + j) * n + l;
                        e1[flat] = n1;
                        e2[((l * n + i) * n + k) * n + j] = n2;
                        e3[flat] = n3;
                    }
                }
            }
        }
        let t3 = -s3 / trn;

        let lhs = -tr_hat_ric[node] / trn - lap_log_tr[node];
        let rhs = term_i.re + t2.re + t3.re;
        residual = residual.max((lhs - rhs).abs());
        lhs_scale = lhs_scale.max(lhs.abs());

        // bound on (I)
        let mut bsum = ZERO;
        for i in 0..n {
            for l in 0..n {
                for q in 0..n {
                    for k in 0..n {
                        for p in 0..n {
                            bsum += hi(l, i) * gi(q, k) * zero.torsion(p, k, i, node) * zero.g(p, l, node) * db_tr[q][node];
                        }
                    }
                }
            }
        }
        let bound_i = 2.0 / (trn * trn) * bsum.re;
        violation_i = violation_i.max(term_i.re - bound_i);

        let frame = UnitaryFrame::new(hat.geo.data().g.iter().map(|c| c[node]).collect::<Vec<_>>().as_slice(), n)
            .ok_or(TensorError::NotPositiveDefinite { node, min_eigenvalue: 0.0 })?;
        use Slot::*;
        c_ii = c_ii.max(frame.norm(&b_tensor, &[Lower, LowerBar, LowerBar, UpperBar]));
        let e_sum = frame.norm(&e1, &[Lower, Lower, LowerBar, LowerBar])
            + frame.norm(&e2, &[LowerBar, Lower, Lower, LowerBar])
            + frame.norm(&e3, &[Lower, Lower, LowerBar, LowerBar]);
        c_iii = c_iii.max((n as f64).sqrt() * e_sum);

        let mut tgh = ZERO;
        for i in 0..n {
            for j in 0..n {
                tgh += gi(j, i) * hat.g(i, j, node);
            }
        }
        tr_g_hat[node] = tgh.re;
        term_ii[node] = t2.re;
        term_iii[node] = t3.re;
    }

    let mut violation_ii = f64::NEG_INFINITY;
    let mut violation_iii = f64::NEG_INFINITY;
    let mut masked_nodes = 0;
    for node in 0..nodes {
        violation_ii = violation_ii.max(term_ii[node] - c_ii * tr_g_hat[node]);
        if tr[node] >= 1.0 {
            violation_iii = violation_iii.max(term_iii[node] - c_iii * tr_g_hat[node]);
        } else {
            masked_nodes += 1;
        }
    }

    Ok(TraceEvolutionReport {
        residual,
        violation_i,
        violation_ii,
        violation_iii,
        c_ii,
        c_iii,
        masked_nodes,
        closedness,
        lhs_scale,
        condition_flagged,
        grid: chart.grid_label(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BianchiReport {
    /// `max |ghat^{lbar k} (dbar_l T^i_{ik} + R_{i lbar k qbar} g^{qbar i} - R_{k lbar i qbar} g^{qbar i})|`
    pub residual: f64,
    /// Sup of each of the three contracted terms separately.
    pub torsion_term: f64,
    pub curvature_terms: (f64, f64),
    pub condition_flagged: bool,
}

pub fn verify_bianchi_vanishing(ghat: &MetricField) -> Result<BianchiReport, TensorError> {
    let geo = ChernGeometry::new(ghat)?;
    let md = geo.data();
    let n = md.n;
    let chart = &md.chart;
    let nodes = chart.node_count();
    // sum_i dbar_l T^i_{ik}, indexed [l][k]
    let mut div = vec![vec![ZERO; nodes]; n * n];
    for k in 0..n {
        let mut trace_t = vec![ZERO; nodes];
        for i in 0..n {
            for (a, b) in trace_t.iter_mut().zip(geo.torsion.get(i, i, k)) {
                *a += b;
            }
        }
        for (l, d) in spectral::dbar(chart, &trace_t).into_iter().enumerate() {
            div[l * n + k] = d;
        }
    }
    let mut residual = 0.0f64;
    let mut t0 = 0.0f64;
    let mut t1 = 0.0f64;
    let mut t2 = 0.0f64;
    for node in 0..nodes {
        let mut a = ZERO;
        let mut b = ZERO;
        let mut c = ZERO;
        for l in 0..n {
            for k in 0..n {
                let h = md.inv(l, k, node);
                a += h * div[l * n + k][node];
                for i in 0..n {
                    for q in 0..n {
                        b += h * geo.curvature.lowered(i, l, k, q)[node] * md.inv(q, i, node);
                        c += h * geo.curvature.lowered(k, l, i, q)[node] * md.inv(q, i, node);
                    }
                }
            }
        }
        residual = residual.max((a + b - c).norm());
        t0 = t0.max(a.norm());
        t1 = t1.max(b.norm());
        t2 = t2.max(c.norm());
    }
    Ok(BianchiReport {
        residual,
        torsion_term: t0,
        curvature_terms: (t1, t2),
        condition_flagged: md.max_condition() > CONDITION_FLAG,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchwarzReport {
    /// `max |(d/dt - Delta) log u - tr_omega Ric(omega_N)|`
    pub residual: f64,
    pub rhs_scale: f64,
    pub condition_flagged: bool,
}

/// Schwarz-type identity for `u = det(gN) / det(g)` with the identity map
/// between the two metrics and `d g / dt = -Ric(g)`.
///
/// The left side uses the spectral Laplacian of `log u` and the curvature
/// trace of `g`; the right side uses the curvature trace of `gN`.
pub fn verify_schwarz_identity(g: &MetricField, gn: &MetricField) -> Result<SchwarzReport, TensorError> {
    ensure_same(g.chart(), gn.chart())?;
    let geo = ChernGeometry::new(g)?;
    let geo_n = ChernGeometry::new(gn)?;
    let md: &MetricData = geo.data();
    let ric_g = geo.ricci_from_curvature();
    let ric_n = geo_n.ricci_from_curvature();
    let dt_log_u = md.trace_of(&ric_g.components());
    let log_u: Vec<f64> = geo_n
        .data()
        .det
        .iter()
        .zip(&md.det)
        .map(|(a, b)| a.ln() - b.ln())
        .collect();
    let lap = md.laplacian_of(&log_u);
    let rhs = md.trace_of(&ric_n.components());
    let mut residual = 0.0f64;
    let mut rhs_scale = 0.0f64;
    for node in 0..md.chart.node_count() {
        residual = residual.max((dt_log_u[node] - lap[node] - rhs[node]).abs());
        rhs_scale = rhs_scale.max(rhs[node].abs());
    }
    Ok(SchwarzReport {
        residual,
        rhs_scale,
        condition_flagged: md.max_condition().max(geo_n.data().max_condition()) > CONDITION_FLAG,
    })
}
