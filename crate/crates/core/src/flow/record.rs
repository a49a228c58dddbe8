use std::fmt::Write as _;
use std::io::{self, Write};

/// Column order of the trajectory CSV.
pub const CSV_COLUMNS: [&str; 15] = [
    "t",
    "dt",
    "volume",
    "min_eig",
    "max_eig",
    "sup_phi",
    "inf_phi",
    "sup_phidot",
    "inf_phidot",
    "max_q1",
    "min_q0",
    "max_psi",
    "osc_phidot",
    "update",
    "schwarz_sup_u",
];

/// Monitors after one accepted step (row zero is the initial state).
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorRow {
    pub t: f64,
    pub dt: f64,
    /// `int det g` over the fundamental cell.
    pub volume: f64,
    pub min_eig: f64,
    pub max_eig: f64,
    pub sup_phi: f64,
    pub inf_phi: f64,
    pub sup_phidot: f64,
    pub inf_phidot: f64,
    /// `max (t phidot - phi - n t)`; unnormalized runs only.
    pub max_q1: Option<f64>,
    /// `min ((T0 - t) phidot + phi + n t)`; unnormalized runs only.
    pub min_q0: Option<f64>,
    /// `max (phi - A t)`; unnormalized runs only.
    pub max_psi: Option<f64>,
    /// `sup |phidot - mean phidot|`
    pub osc_phidot: f64,
    /// `sup |phi_new - phi_old| / dt` with the spatial mean of the update removed.
    pub update: f64,
    /// `sup det(g0) / det(g)` when requested.
    pub schwarz_sup_u: Option<f64>,
}

impl MonitorRow {
    fn fields(&self) -> [Option<f64>; 15] {
        [
            Some(self.t),
            Some(self.dt),
            Some(self.volume),
            Some(self.min_eig),
            Some(self.max_eig),
            Some(self.sup_phi),
            Some(self.inf_phi),
            Some(self.sup_phidot),
            Some(self.inf_phidot),
            self.max_q1,
            self.min_q0,
            self.max_psi,
            Some(self.osc_phidot),
            Some(self.update),
            self.schwarz_sup_u,
        ]
    }

    /// Value of a named column.
    pub fn get(&self, column: &str) -> Option<f64> {
        let i = CSV_COLUMNS.iter().position(|c| *c == column)?;
        self.fields()[i]
    }
}

/// Per-step monitors, strictly increasing in `t`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryRecord {
    pub rows: Vec<MonitorRow>,
}

/// Lossless fixed-width float formatting (17 significant digits).
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl TrajectoryRecord {
    pub fn push(&mut self, row: MonitorRow) {
        debug_assert!(self.rows.last().map_or(true, |r| r.t < row.t));
        self.rows.push(row);
    }

    pub fn last(&self) -> Option<&MonitorRow> {
        self.rows.last()
    }

    pub fn column(&self, name: &str) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.get(name)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = CSV_COLUMNS.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.fields().iter().map(|v| v.map(format_float).unwrap_or_default()).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }

    /// Largest one-step increase of `max Q1`, decrease of `min Q0` and
    /// increase of `max psi` (all should be `<= 0` up to jitter).
    pub fn monotonicity_defects(&self) -> (f64, f64, f64) {
        let mut q1 = f64::NEG_INFINITY;
        let mut q0 = f64::NEG_INFINITY;
        let mut psi = f64::NEG_INFINITY;
        for w in self.rows.windows(2) {
            if let (Some(a), Some(b)) = (w[0].max_q1, w[1].max_q1) {
                q1 = q1.max(b - a);
            }
            if let (Some(a), Some(b)) = (w[0].min_q0, w[1].min_q0) {
                q0 = q0.max(a - b);
            }
            if let (Some(a), Some(b)) = (w[0].max_psi, w[1].max_psi) {
                psi = psi.max(b - a);
            }
        }
        (q1, q0, psi)
    }
}
