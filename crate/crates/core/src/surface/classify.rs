use std::f64::consts::PI;
use std::fmt;

use super::data::{Kodaira, SurfaceClassData};
use super::maxtime::{Binding, CollapseCase, MaxTimeResult};
use super::SurfaceError;

/// Narrative consequences of the computed case, given the flags.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub case: CollapseCase,
    pub lines: Vec<String>,
}

impl fmt::Display for ClassificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "case ({})", self.case)?;
        for l in &self.lines {
            writeln!(f, "  {l}")?;
        }
        Ok(())
    }
}

fn is_minus_one_curve(d_self: i64, d_dot_k: i64) -> bool {
    d_self == -1 && d_dot_k == -1
}

/// Checks the flags against the computed case and returns the implied
/// geometry. Any disagreement is a data error.
pub fn classify(data: &SurfaceClassData, result: &MaxTimeResult) -> Result<ClassificationReport, SurfaceError> {
    let flags = &data.flags;
    let contra = |m: String| Err(SurfaceError::FlagContradiction(m));
    if flags.minimal {
        if let Some(d) = data.divisors.iter().find(|d| is_minus_one_curve(d.d_self, d.d_dot_k)) {
            return contra(format!("minimal = true but {} is a (-1)-curve", d.name));
        }
    }
    if flags.kahler && flags.class_vii_b2.is_some() {
        return contra("class VII surfaces have b1 = 1 and are never Kähler".into());
    }
    if flags.class_vii_b2.is_some() && flags.kodaira.is_nonnegative() {
        return contra(format!("class VII requires Kodaira dimension -inf, found {}", flags.kodaira));
    }
    if let (Some(b2), true) = (flags.class_vii_b2, flags.minimal) {
        let expected = -4.0 * PI * PI * b2 as f64;
        if (data.c1sq - expected).abs() > 1e-9 * (1.0 + expected.abs()) {
            return contra(format!("minimal class VII with b2 = {b2} needs c1sq = {expected:.12}, found {}", data.c1sq));
        }
    }

    let mut lines = Vec::new();
    match result.case {
        CollapseCase::A => {
            if !flags.minimal {
                return contra("T = infinity forces M to be minimal, but minimal = false".into());
            }
            lines.push("T = infinity: the flow exists for all time and M is minimal".into());
            if flags.kodaira == Kodaira::Zero {
                lines.push("Kodaira dimension 0: the flow converges to a Chern-Ricci-flat metric".into());
            }
            if flags.class_vii_b2 == Some(0) {
                lines.push("class VII with b2 = 0 and long-time existence: an Inoue surface".into());
            }
        }
        CollapseCase::B => {
            if flags.kodaira.is_nonnegative() {
                return contra(format!(
                    "volume collapse forces Kodaira dimension -inf, found {}: an effective pluricanonical divisor would make int omega0 ^ c1 negative and keep the volume positive",
                    flags.kodaira
                ));
            }
            lines.push(format!("T = {:.12}: the volume tends to zero", result.t_max));
            match flags.class_vii_b2 {
                Some(0) => lines.push("class VII, collapsing, not Inoue (Hopf type)".into()),
                Some(b2) => lines.push(format!("class VII with b2 = {b2}, collapsing")),
                None => lines.push("birational to a ruled surface (or CP^2)".into()),
            }
        }
        CollapseCase::C => {
            let Binding::DivisorCollapse(name) = &result.binding else {
                unreachable!("case (c) always has a divisor binding")
            };
            let d = data.divisors.iter().find(|d| &d.name == name).expect("binding names a listed divisor");
            if !is_minus_one_curve(d.d_self, d.d_dot_k) {
                return contra(format!(
                    "{} collapses first with (D^2, D.K) = ({}, {}); adjunction allows only a (-1)-curve",
                    d.name, d.d_self, d.d_dot_k
                ));
            }
            if flags.minimal {
                return contra("a (-1)-curve collapses but minimal = true".into());
            }
            lines.push(format!("T = {:.12}: the volume stays positive and the (-1)-curve {} collapses", result.t_max, d.name));
            lines.push("M contains (-1)-curves; the expected continuation contracts them".into());
        }
    }
    lines.push(
        "T accounts only for the listed curves; it assumes every irreducible curve with D^2 < 0 is among them".into(),
    );
    Ok(ClassificationReport { case: result.case, lines })
}
