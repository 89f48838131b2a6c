use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{CbfError, Result};

pub const CSV_HEADER: &str =
    "step,t,dt,l2,grad_l2,h1,stokes_l2,lr1,energy_residual,tail_fraction";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub step: u64,
    pub t: f64,
    /// Step size that produced this state; 0 for the initial row.
    pub dt: f64,
    pub l2: f64,
    pub grad_l2: f64,
    pub h1: f64,
    pub stokes_l2: f64,
    /// ||u||_{L^{r+1}}.
    pub lr1: f64,
    /// Energy balance residual over the interval ending at this row.
    pub energy_residual: f64,
    pub tail_fraction: f64,
    /// <f(t), u(t)>; kept in memory only, it is not part of the CSV.
    #[serde(skip)]
    pub forcing_power: f64,
}

impl DiagnosticsRow {
    fn values(&self) -> [f64; 9] {
        [
            self.t,
            self.dt,
            self.l2,
            self.grad_l2,
            self.h1,
            self.stokes_l2,
            self.lr1,
            self.energy_residual,
            self.tail_fraction,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite()) && self.forcing_power.is_finite()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSeries {
    pub rows: Vec<DiagnosticsRow>,
}

impl DiagnosticsSeries {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn column<F: Fn(&DiagnosticsRow) -> f64>(&self, f: F) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn first_t(&self) -> Option<f64> {
        self.rows.first().map(|r| r.t)
    }

    pub fn last_t(&self) -> Option<f64> {
        self.rows.last().map(|r| r.t)
    }

    /// Errors unless the recorded times span [t0, t1] (relative slack 1e-9).
    pub fn ensure_covers(&self, t0: f64, t1: f64) -> Result<()> {
        let (Some(a), Some(b)) = (self.first_t(), self.last_t()) else {
            return Err(CbfError::Coverage("no diagnostics recorded".into()));
        };
        let tol = 1e-9 * t1.abs().max(1.0);
        if a > t0 + tol || b < t1 - tol {
            return Err(CbfError::Coverage(format!(
                "recorded [{a}, {b}] does not cover [{t0}, {t1}]"
            )));
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for row in &self.rows {
            write!(w, "{}", row.step)?;
            for v in row.values() {
                write!(w, ",{v:e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Parses the CSV form. The in-memory forcing power is not stored there and
    /// reads back as 0.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| CbfError::InvalidArgument("empty diagnostics file".into()))??;
        if header.trim() != CSV_HEADER {
            return Err(CbfError::InvalidArgument(format!(
                "unexpected diagnostics header {header:?}"
            )));
        }
        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = || CbfError::InvalidArgument(format!("malformed diagnostics row {}", lineno + 2));
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 10 {
                return Err(bad());
            }
            let step = cells[0].trim().parse::<u64>().map_err(|_| bad())?;
            let mut v = [0.0; 9];
            for (slot, cell) in v.iter_mut().zip(&cells[1..]) {
                *slot = cell.trim().parse::<f64>().map_err(|_| bad())?;
            }
            rows.push(DiagnosticsRow {
                step,
                t: v[0],
                dt: v[1],
                l2: v[2],
                grad_l2: v[3],
                h1: v[4],
                stokes_l2: v[5],
                lr1: v[6],
                energy_residual: v[7],
                tail_fraction: v[8],
                forcing_power: 0.0,
            });
        }
        Ok(Self { rows })
    }
}

/// Trapezoidal integral of samples `y` at times `t`.
pub fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    assert_eq!(t.len(), y.len());
    t.windows(2)
        .zip(y.windows(2))
        .map(|(tw, yw)| 0.5 * (tw[1] - tw[0]) * (yw[0] + yw[1]))
        .sum()
}

/// Running trapezoidal integral, starting at 0.
pub fn cumulative_trapezoid(t: &[f64], y: &[f64]) -> Vec<f64> {
    assert_eq!(t.len(), y.len());
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(t.len());
    if !t.is_empty() {
        out.push(0.0);
    }
    for i in 1..t.len() {
        acc += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
        out.push(acc);
    }
    out
}
