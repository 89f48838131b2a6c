use std::fmt::Write as _;
use std::path::PathBuf;

use super::artifacts::ArtifactWriter;
use super::scenario::SweepResult;
use crate::error::{CbfError, Result};
use crate::integrator::DiagnosticsSeries;
use crate::operators::InequalityReport;

/// Inputs accepted by [`emit_plot_data`], one panel each.
#[derive(Debug, Clone, Copy)]
pub enum PlotData<'a> {
    Diagnostics(&'a DiagnosticsSeries),
    Sweep(&'a SweepResult),
    Inequalities(&'a [InequalityReport]),
}

struct Panel {
    name: &'static str,
    columns: &'static [(&'static str, &'static str)],
    rows: Vec<Vec<String>>,
}

const NORM_COLUMNS: &[(&str, &str)] = &[
    ("t", "time"),
    ("l2", "L2 norm of u"),
    ("grad_l2", "L2 norm of grad u"),
    ("h1", "H1 norm of u"),
    ("stokes_l2", "L2 norm of the Stokes operator applied to u"),
    ("lr1", "L^{r+1} norm of u"),
];

const MARGIN_COLUMNS: &[(&str, &str)] = &[
    ("epsilon", "perturbation size"),
    ("lhs", "data distance entering the certificate"),
    ("r_of_u", "certificate threshold of the reference run"),
    ("margin", "r_of_u - lhs"),
    ("certified", "1 when margin > 0"),
    ("completed", "1 when the perturbed run reached the horizon"),
    ("sup_h1_of_difference", "sup over time of the H1 norm of u - v"),
];

const INEQUALITY_COLUMNS: &[(&str, &str)] = &[
    ("lemma_id", "checked inequality"),
    ("samples", "number of samples"),
    ("worst_ratio", "extreme observed ratio"),
    ("certified_bound", "bound the ratio is compared with, empty if none"),
    ("pass", "1 when the bound held on every sample"),
];

fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

fn panel(data: PlotData) -> Result<Panel> {
    let empty = |what: &str| CbfError::InvalidArgument(format!("no {what} to plot"));
    Ok(match data {
        PlotData::Diagnostics(d) => {
            if d.is_empty() {
                return Err(empty("diagnostics"));
            }
            Panel {
                name: "norms_vs_time",
                columns: NORM_COLUMNS,
                rows: d
                    .rows
                    .iter()
                    .map(|r| {
                        [r.t, r.l2, r.grad_l2, r.h1, r.stokes_l2, r.lr1]
                            .iter()
                            .map(|v| format!("{v:e}"))
                            .collect()
                    })
                    .collect(),
            }
        }
        PlotData::Sweep(s) => {
            if s.rows.is_empty() {
                return Err(empty("sweep rows"));
            }
            Panel {
                name: "margin_vs_epsilon",
                columns: MARGIN_COLUMNS,
                rows: s
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            format!("{:e}", r.epsilon),
                            format!("{:e}", r.lhs),
                            format!("{:e}", r.r_of_u),
                            format!("{:e}", r.margin),
                            flag(r.certified()),
                            flag(r.simulated_outcome.is_completed()),
                            format!("{:e}", r.sup_h1_of_difference),
                        ]
                    })
                    .collect(),
            }
        }
        PlotData::Inequalities(reps) => {
            if reps.is_empty() {
                return Err(empty("inequality reports"));
            }
            Panel {
                name: "inequality_worst_ratios",
                columns: INEQUALITY_COLUMNS,
                rows: reps
                    .iter()
                    .map(|r| {
                        vec![
                            r.lemma_id.as_str().to_string(),
                            r.samples.to_string(),
                            format!("{:e}", r.worst_ratio),
                            r.certified_bound.map_or(String::new(), |b| format!("{b:e}")),
                            flag(r.pass),
                        ]
                    })
                    .collect(),
            }
        }
    })
}

/// Writes `plots/<panel>.csv` and the column description
/// `plots/<panel>.columns.txt`. Nothing is written for empty input.
pub fn emit_plot_data(data: PlotData, out: &mut ArtifactWriter) -> Result<Vec<PathBuf>> {
    let p = panel(data)?;
    let header: Vec<&str> = p.columns.iter().map(|(c, _)| *c).collect();
    let mut csv = header.join(",");
    csv.push('\n');
    for row in &p.rows {
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    let mut doc = String::new();
    for (c, d) in p.columns {
        writeln!(doc, "{c}: {d}").unwrap();
    }
    Ok(vec![
        out.write(&format!("plots/{}.csv", p.name), csv.as_bytes())?,
        out.write(&format!("plots/{}.columns.txt", p.name), doc.as_bytes())?,
    ])
}
