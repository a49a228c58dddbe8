use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use super::data::{Divisor, SurfaceClassData};
use super::SurfaceError;

const DISCRIMINANT_GUARD: f64 = 1e-14;

/// `V_t = vol0 - 2 t pairing + t^2 c1sq`
pub fn volume_polynomial(data: &SurfaceClassData, t: f64) -> f64 {
    data.vol0 - 2.0 * t * data.pairing + t * t * data.c1sq
}

/// `int_D omega(t) = int_D omega0 + 2 pi t D.K`
pub fn divisor_volume(d: &Divisor, t: f64) -> f64 {
    d.omega0_vol + 2.0 * PI * t * d.d_dot_k as f64
}

/// Smallest `t > 0` with `a + b t + c t^2 = 0`, for `a > 0`.
pub fn smallest_positive_root(a: f64, b: f64, c: f64) -> Option<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if c.abs() <= DISCRIMINANT_GUARD * scale {
        return (b < 0.0).then(|| -a / b);
    }
    let mut disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        if disc < -DISCRIMINANT_GUARD * (b * b + (4.0 * a * c).abs()) {
            return None;
        }
        disc = 0.0;
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut roots = Vec::with_capacity(2);
    if q != 0.0 {
        roots.push(q / c);
        roots.push(a / q);
    } else {
        roots.push((-a / c).abs().sqrt());
    }
    roots.into_iter().filter(|r| *r > 0.0 && r.is_finite()).min_by(|x, y| x.total_cmp(y))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "divisor", rename_all = "kebab-case")]
pub enum Binding {
    VolumeCollapse,
    DivisorCollapse(String),
    None,
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Binding::VolumeCollapse => write!(f, "volume-collapse"),
            Binding::DivisorCollapse(name) => write!(f, "divisor-collapse({name})"),
            Binding::None => write!(f, "none"),
        }
    }
}

/// Trichotomy for the end of the flow on a surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CollapseCase {
    /// `T = infinity`
    A,
    /// `T < infinity` and the volume tends to zero.
    B,
    /// `T < infinity` and the volume stays positive.
    C,
}

impl fmt::Display for CollapseCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CollapseCase::A => "a",
            CollapseCase::B => "b",
            CollapseCase::C => "c",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxTimeResult {
    /// `f64::INFINITY` for long-time existence.
    pub t_max: f64,
    pub binding: Binding,
    pub case: CollapseCase,
    /// `(vol0, -2 pairing, c1sq)`
    pub volume_poly: [f64; 3],
}

impl MaxTimeResult {
    pub fn is_finite(&self) -> bool {
        self.t_max.is_finite()
    }
}

pub fn maximal_time(data: &SurfaceClassData) -> Result<MaxTimeResult, SurfaceError> {
    data.validate()?;
    let poly = [data.vol0, -2.0 * data.pairing, data.c1sq];
    let t_vol = smallest_positive_root(poly[0], poly[1], poly[2]);
    let mut t_div: Option<(f64, &str)> = None;
    for d in &data.divisors {
        if d.d_dot_k < 0 {
            let t = d.omega0_vol / (2.0 * PI * (-d.d_dot_k) as f64);
            if t_div.map_or(true, |(best, _)| t < best) {
                t_div = Some((t, d.name.as_str()));
            }
        }
    }
    let (t_max, binding) = match (t_vol, t_div) {
        (None, None) => (f64::INFINITY, Binding::None),
        (Some(tv), None) => (tv, Binding::VolumeCollapse),
        (None, Some((td, name))) => (td, Binding::DivisorCollapse(name.to_string())),
        // A simultaneous vanishing counts as volume collapse since V_T = 0.
        (Some(tv), Some((td, name))) => {
            if td < tv * (1.0 - 1e-12) {
                (td, Binding::DivisorCollapse(name.to_string()))
            } else {
                (tv, Binding::VolumeCollapse)
            }
        }
    };
    let case = match binding {
        Binding::None => CollapseCase::A,
        Binding::VolumeCollapse => CollapseCase::B,
        Binding::DivisorCollapse(_) => CollapseCase::C,
    };
    Ok(MaxTimeResult { t_max, binding, case, volume_poly: poly })
}
