//! Deterministic SVG line plots of trajectory CSV columns against `t`.

use std::fmt::Write as _;
use std::path::Path;

use crate::failure::Failure;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 90.0;
const MARGIN_R: f64 = 170.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Reads `t` and the requested columns; empty cells are skipped.
pub fn read_series(path: &Path, columns: &[String]) -> Result<Vec<Series>, Failure> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| Failure::validation(e.to_string()))?.clone();
    if headers.is_empty() {
        return Err(Failure::validation(format!("{}: empty CSV", path.display())));
    }
    let idx = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Failure::validation(format!("column `{name}` not found in {}", path.display())))
    };
    let t_idx = idx("t")?;
    let cols: Vec<usize> = columns.iter().map(|c| idx(c)).collect::<Result<_, _>>()?;
    let mut series: Vec<Series> = columns.iter().map(|c| Series { name: c.clone(), points: Vec::new() }).collect();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Failure::validation(e.to_string()))?;
        rows += 1;
        let t: f64 = rec
            .get(t_idx)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Failure::validation(format!("row {rows}: bad t")))?;
        for (s, &c) in series.iter_mut().zip(&cols) {
            let cell = rec.get(c).unwrap_or("");
            if cell.is_empty() {
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Failure::validation(format!("row {rows}: bad value `{cell}`")))?;
            if v.is_finite() {
                s.points.push((t, v));
            }
        }
    }
    if rows == 0 {
        return Err(Failure::validation(format!("{}: no data rows", path.display())));
    }
    Ok(series)
}

fn bounds(series: &[Series]) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(x, y) in &s.points {
            b = (b.0.min(x), b.1.max(x), b.2.min(y), b.3.max(y));
        }
    }
    if !b.0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    if b.1 - b.0 <= 0.0 {
        b.1 = b.0 + 1.0;
    }
    if b.3 - b.2 <= 1e-300 {
        let pad = b.2.abs().max(1.0) * 1e-6;
        b.2 -= pad;
        b.3 += pad;
    }
    b
}

pub fn render_svg(series: &[Series], title: &str) -> String {
    let (x0, x1, y0, y1) = bounds(series);
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_T + (1.0 - (y - y0) / (y1 - y0)) * ph;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="DejaVu Sans Mono, monospace" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#, MARGIN_L + pw / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let x = x0 + f * (x1 - x0);
        let y = y0 + f * (y1 - y0);
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
            sx(x),
            HEIGHT - MARGIN_B + 18.0,
            tick(x)
        );
        let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{}</text>"#, MARGIN_L - 6.0, sy(y) + 4.0, tick(y));
    }
    let _ = writeln!(s, r#"<text x="{:.3}" y="{}" text-anchor="middle">t</text>"#, MARGIN_L + pw / 2.0, HEIGHT - 8.0);
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.3},{:.3}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ly = MARGIN_T + 16.0 * (i as f64 + 1.0);
        let lx = WIDTH - MARGIN_R + 10.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{:.3}" x2="{}" y2="{:.3}" stroke="{color}" stroke-width="2"/>"#, ly - 4.0, lx + 20.0, ly - 4.0);
        let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, lx + 26.0, escape(&ser.name));
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
