//! Small dense complex matrices stored row-major in slices.

use num_complex::Complex64;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

pub fn identity(n: usize) -> Vec<C> {
    let mut m = vec![ZERO; n * n];
    for i in 0..n {
        m[i * n + i] = ONE;
    }
    m
}

pub fn matmul(a: &[C], b: &[C], n: usize) -> Vec<C> {
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

pub fn adjoint(a: &[C], n: usize) -> Vec<C> {
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j].conj();
        }
    }
    out
}

/// Gauss-Jordan inverse with partial pivoting; `None` if singular.
pub fn inverse(a: &[C], n: usize) -> Option<Vec<C>> {
    let mut m = a.to_vec();
    let mut inv = identity(n);
    for col in 0..n {
        let mut piv = col;
        let mut best = m[col * n + col].norm();
        for r in col + 1..n {
            let v = m[r * n + col].norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return None;
        }
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
                inv.swap(col * n + j, piv * n + j);
            }
        }
        let d = ONE / m[col * n + col];
        for j in 0..n {
            m[col * n + j] *= d;
            inv[col * n + j] *= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * n + col];
            if f == ZERO {
                continue;
            }
            for j in 0..n {
                let mv = m[col * n + j];
                let iv = inv[col * n + j];
                m[r * n + j] -= f * mv;
                inv[r * n + j] -= f * iv;
            }
        }
    }
    Some(inv)
}

pub fn determinant(a: &[C], n: usize) -> C {
    match n {
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        3 => {
            a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        _ => {
            let mut m = a.to_vec();
            let mut det = ONE;
            for col in 0..n {
                let mut piv = col;
                for r in col + 1..n {
                    if m[r * n + col].norm() > m[piv * n + col].norm() {
                        piv = r;
                    }
                }
                if m[piv * n + col] == ZERO {
                    return ZERO;
                }
                if piv != col {
                    for j in 0..n {
                        m.swap(col * n + j, piv * n + j);
                    }
                    det = -det;
                }
                let p = m[col * n + col];
                det *= p;
                for r in col + 1..n {
                    let f = m[r * n + col] / p;
                    for j in col..n {
                        let v = m[col * n + j];
                        m[r * n + j] -= f * v;
                    }
                }
            }
            det
        }
    }
}

/// Determinant of a Hermitian positive-definite matrix (real part only).
pub fn hermitian_det(a: &[C], n: usize) -> f64 {
    determinant(a, n).re
}

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// Closed forms for `n <= 2`; cyclic Jacobi on the real symmetric embedding
/// `[[A, -B], [B, A]]` of `A + iB` otherwise, which doubles every eigenvalue.
pub fn hermitian_eigenvalues(a: &[C], n: usize) -> Vec<f64> {
    match n {
        1 => vec![a[0].re],
        2 => {
            let p = a[0].re;
            let q = a[3].re;
            let mean = 0.5 * (p + q);
            let half = 0.5 * (p - q);
            let rad = (half * half + a[1].norm_sqr()).sqrt();
            vec![mean - rad, mean + rad]
        }
        _ => {
            let m = 2 * n;
            let mut s = vec![0.0; m * m];
            for i in 0..n {
                for j in 0..n {
                    let v = a[i * n + j];
                    s[i * m + j] = v.re;
                    s[(i + n) * m + (j + n)] = v.re;
                    s[i * m + (j + n)] = -v.im;
                    s[(i + n) * m + j] = v.im;
                }
            }
            let ev = jacobi_symmetric(&mut s, m);
            let mut sorted = ev;
            sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
            (0..n).map(|k| 0.5 * (sorted[2 * k] + sorted[2 * k + 1])).collect()
        }
    }
}

pub fn min_eigenvalue(a: &[C], n: usize) -> f64 {
    hermitian_eigenvalues(a, n)[0]
}

fn jacobi_symmetric(s: &mut [f64], m: usize) -> Vec<f64> {
    let scale = s.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..m {
            for q in p + 1..m {
                off += s[p * m + q] * s[p * m + q];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = s[p * m + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = s[p * m + p];
                let aqq = s[q * m + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..m {
                    let skp = s[k * m + p];
                    let skq = s[k * m + q];
                    s[k * m + p] = c * skp - sn * skq;
                    s[k * m + q] = sn * skp + c * skq;
                }
                for k in 0..m {
                    let spk = s[p * m + k];
                    let sqk = s[q * m + k];
                    s[p * m + k] = c * spk - sn * sqk;
                    s[q * m + k] = sn * spk + c * sqk;
                }
            }
        }
    }
    (0..m).map(|i| s[i * m + i]).collect()
}

/// Cholesky factor `L` with `A = L L^*` for Hermitian positive-definite `A`.
pub fn cholesky(a: &[C], n: usize) -> Option<Vec<C>> {
    let mut l = vec![ZERO; n * n];
    for j in 0..n {
        let mut d = a[j * n + j].re;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[j * n + j] = C::new(djj, 0.0);
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = v / djj;
        }
    }
    Some(l)
}

/// Averages `a` with its conjugate transpose; returns the largest entrywise
/// correction.
pub fn hermitize(a: &mut [C], n: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..n {
        let d = a[i * n + i];
        worst = worst.max(d.im.abs());
        a[i * n + i] = C::new(d.re, 0.0);
        for j in i + 1..n {
            let u = a[i * n + j];
            let l = a[j * n + i];
            let avg = 0.5 * (u + l.conj());
            worst = worst.max((u - avg).norm()).max((l - avg.conj()).norm());
            a[i * n + j] = avg;
            a[j * n + i] = avg.conj();
        }
    }
    worst
}
