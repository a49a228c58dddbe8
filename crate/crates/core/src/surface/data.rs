use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::model::{integrate_hopf, HopfIntegrand, HopfQuadrature, ModelError};

use super::SurfaceError;

/// Kodaira dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kodaira {
    NegInfinity,
    Zero,
    One,
    Two,
}

impl Kodaira {
    pub fn is_nonnegative(self) -> bool {
        self != Kodaira::NegInfinity
    }
}

impl fmt::Display for Kodaira {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kodaira::NegInfinity => write!(f, "-inf"),
            Kodaira::Zero => write!(f, "0"),
            Kodaira::One => write!(f, "1"),
            Kodaira::Two => write!(f, "2"),
        }
    }
}

impl Serialize for Kodaira {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Kodaira::NegInfinity => s.serialize_str("-inf"),
            Kodaira::Zero => s.serialize_i64(0),
            Kodaira::One => s.serialize_i64(1),
            Kodaira::Two => s.serialize_i64(2),
        }
    }
}

impl<'de> Deserialize<'de> for Kodaira {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Kodaira;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "\"-inf\", 0, 1 or 2")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Kodaira, E> {
                match v {
                    0 => Ok(Kodaira::Zero),
                    1 => Ok(Kodaira::One),
                    2 => Ok(Kodaira::Two),
                    _ => Err(E::custom(format!("Kodaira dimension {v} is not one of -inf, 0, 1, 2"))),
                }
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Kodaira, E> {
                self.visit_i64(v.min(i64::MAX as u64) as i64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Kodaira, E> {
                match v {
                    "-inf" | "-infinity" => Ok(Kodaira::NegInfinity),
                    "0" => Ok(Kodaira::Zero),
                    "1" => Ok(Kodaira::One),
                    "2" => Ok(Kodaira::Two),
                    _ => Err(E::custom(format!("Kodaira dimension `{v}` is not one of -inf, 0, 1, 2"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Irreducible curve with negative self-intersection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Divisor {
    pub name: String,
    /// `D^2`
    pub d_self: i64,
    /// `D.K_M`
    pub d_dot_k: i64,
    /// `int_D omega0`
    pub omega0_vol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceFlags {
    pub minimal: bool,
    pub kodaira: Kodaira,
    #[serde(default)]
    pub class_vii_b2: Option<u32>,
    pub kahler: bool,
}

/// Cohomological data of `(M, omega0)` with `omega0` Gauduchon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceClassData {
    /// `int omega0^2`
    pub vol0: f64,
    /// `int omega0 ^ Ric(omega0)`
    pub pairing: f64,
    /// `int Ric(omega0)^2`
    pub c1sq: f64,
    #[serde(default)]
    pub divisors: Vec<Divisor>,
    pub flags: SurfaceFlags,
}

/// A data file: `[surface]` plus an optional label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceFile {
    #[serde(default)]
    pub label: Option<String>,
    pub surface: SurfaceClassData,
}

impl SurfaceFile {
    pub fn parse(text: &str) -> Result<Self, SurfaceError> {
        let file: SurfaceFile = toml::from_str(text).map_err(|e| SurfaceError::Parse(e.to_string()))?;
        file.surface.validate()?;
        Ok(file)
    }
}

impl SurfaceClassData {
    pub fn validate(&self) -> Result<(), SurfaceError> {
        let bad = |m: String| Err(SurfaceError::InconsistentData(m));
        if !(self.vol0 > 0.0 && self.vol0.is_finite()) {
            return bad(format!("vol0 = {} must be positive", self.vol0));
        }
        if !self.pairing.is_finite() || !self.c1sq.is_finite() {
            return bad("pairing and c1sq must be finite".into());
        }
        for d in &self.divisors {
            if !(d.omega0_vol > 0.0 && d.omega0_vol.is_finite()) {
                return bad(format!("divisor {} has non-positive initial volume {}", d.name, d.omega0_vol));
            }
            if d.d_self >= 0 {
                return bad(format!("divisor {} has D^2 = {} (only D^2 < 0 curves constrain T)", d.name, d.d_self));
            }
        }
        Ok(())
    }

    /// Data of `lambda omega0`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        out.vol0 *= lambda * lambda;
        out.pairing *= lambda;
        for d in &mut out.divisors {
            d.omega0_vol *= lambda;
        }
        out
    }
}

/// Surface data of the `n = 2` Hopf manifold with modulus `|alpha|`, with the
/// integrals computed by quadrature over a fundamental annulus.
pub fn hopf_surface_data(quad: HopfQuadrature) -> Result<SurfaceClassData, ModelError> {
    Ok(SurfaceClassData {
        vol0: integrate_hopf(quad, HopfIntegrand::Omega0Squared)?,
        pairing: integrate_hopf(quad, HopfIntegrand::Omega0WedgeRic)?,
        c1sq: integrate_hopf(quad, HopfIntegrand::RicSquared)?,
        divisors: Vec::new(),
        flags: SurfaceFlags { minimal: true, kodaira: Kodaira::NegInfinity, class_vii_b2: Some(0), kahler: false },
    })
}
