//! Rendering of evaluation reports as aligned text tables, JSON or CSV.

use std::fmt::Write as _;

use crate::error::Result;
use crate::eval::EvaluationReport;

/// Output style for [`render_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportStyle {
    Text,
    Json,
    Csv,
}

/// Render a report. The text style mirrors the classic classifier-output
/// layout (performance block, other results, confusion matrix); JSON is
/// schema-stable and round-trips through serde; CSV emits one metric per row
/// followed by the matrix cells.
pub fn render_report(report: &EvaluationReport, style: ReportStyle) -> Result<String> {
    match style {
        ReportStyle::Text => Ok(render_text(report)),
        ReportStyle::Json => Ok(serde_json::to_string_pretty(report)?),
        ReportStyle::Csv => Ok(render_csv(report)),
    }
}

fn render_text(r: &EvaluationReport) -> String {
    let mut out = String::new();
    let total = r.correct + r.incorrect;
    let _ = writeln!(out, "=== Evaluation: {} / {} ===", r.model, r.protocol);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "Correctly Classified Instances   {:>8}    {:>9.4} %",
        r.correct, r.accuracy_pct
    );
    let _ = writeln!(
        out,
        "Incorrectly Classified Instances {:>8}    {:>9.4} %",
        r.incorrect,
        100.0 - r.accuracy_pct
    );
    let _ = writeln!(out, "Kappa statistic                  {:>13.4}", r.kappa);
    let _ = writeln!(out, "Mean absolute error              {:>13.4}", r.mae);
    let _ = writeln!(out, "Root mean squared error          {:>13.4}", r.rmse);
    let _ = writeln!(
        out,
        "Relative absolute error          {:>12.4} %",
        r.rae_pct
    );
    let _ = writeln!(
        out,
        "Root relative squared error      {:>12.4} %",
        r.rrse_pct
    );
    let _ = writeln!(out, "Total Number of Instances        {total:>8}");
    let _ = writeln!(out);
    let _ = writeln!(out, "=== Confusion Matrix ===");
    let _ = writeln!(out);

    // column letters a, b, c, ...
    let letters: Vec<String> = (0..r.matrix.labels.len())
        .map(|i| ((b'a' + i as u8) as char).to_string())
        .collect();
    let width = r
        .matrix
        .counts
        .iter()
        .flatten()
        .map(|c| c.to_string().len())
        .max()
        .unwrap_or(1)
        .max(2);
    let header: Vec<String> = letters.iter().map(|l| format!("{l:>width$}")).collect();
    let _ = writeln!(out, " {}   <-- classified as", header.join(" "));
    for (i, row) in r.matrix.counts.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        let _ = writeln!(
            out,
            " {} | {} = {}",
            cells.join(" "),
            letters[i],
            r.matrix.labels[i]
        );
    }
    out
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render_csv(r: &EvaluationReport) -> String {
    let mut out = String::from("metric,value\n");
    let _ = writeln!(out, "correct,{}", r.correct);
    let _ = writeln!(out, "incorrect,{}", r.incorrect);
    let _ = writeln!(out, "accuracy_pct,{}", r.accuracy_pct);
    let _ = writeln!(out, "kappa,{}", r.kappa);
    let _ = writeln!(out, "mae,{}", r.mae);
    let _ = writeln!(out, "rmse,{}", r.rmse);
    let _ = writeln!(out, "rae_pct,{}", r.rae_pct);
    let _ = writeln!(out, "rrse_pct,{}", r.rrse_pct);
    let _ = writeln!(out, "protocol,{}", csv_escape(&r.protocol));
    let _ = writeln!(out, "model,{}", csv_escape(&r.model));
    let _ = writeln!(out, "seed,{}", r.seed);
    out.push_str("actual,predicted,count\n");
    for (i, row) in r.matrix.counts.iter().enumerate() {
        for (j, &count) in row.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{count}",
                csv_escape(&r.matrix.labels[i]),
                csv_escape(&r.matrix.labels[j])
            );
        }
    }
    out
}
