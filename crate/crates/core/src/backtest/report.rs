//! Tidy CSV and markdown renderings of a [`MetricReport`].

use std::io::Write;

use super::benchmark::{MetricReport, ReportEntry};
use super::metrics::MatrixNorm;
use crate::error::Result;

fn num(x: f64) -> String {
    format!("{x:.6e}")
}

fn gamma_str(g: Option<f64>) -> String {
    g.map(|g| format!("{g}")).unwrap_or_default()
}

/// Columns `method,metric,gamma,value,lower95,upper95`; `gamma` and the
/// interval are empty when not applicable.
pub fn write_report_csv<W: Write>(report: &MetricReport, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["method", "metric", "gamma", "value", "lower95", "upper95"])?;
    for e in &report.entries {
        let (lo, hi) = e
            .interval
            .map(|(l, u)| (num(l), num(u)))
            .unwrap_or_default();
        wtr.write_record([
            e.method.label().to_string(),
            e.metric.clone(),
            gamma_str(e.gamma),
            num(e.value),
            lo,
            hi,
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

fn cell(e: Option<&ReportEntry>) -> String {
    e.map(|e| num(e.value)).unwrap_or_else(|| "-".into())
}

fn interval_cell(e: Option<&ReportEntry>) -> String {
    match e.and_then(|e| e.interval) {
        Some((l, u)) => format!("[{}, {}]", num(l), num(u)),
        None => "-".into(),
    }
}

fn gammas(report: &MetricReport) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for g in report.entries.iter().filter_map(|e| e.gamma) {
        if !out.contains(&g) {
            out.push(g);
        }
    }
    out
}

/// Four tables: weight errors, matrix errors, and their bootstrap intervals.
pub fn write_report_md<W: Write>(report: &MetricReport, mut w: W) -> Result<()> {
    let methods = report.methods();
    let gs = gammas(report);
    let has_ci = report.entries.iter().any(|e| e.interval.is_some());

    writeln!(w, "# Covariance forecasting benchmark\n")?;
    writeln!(w, "Scored one-step-ahead forecasts: {}\n", report.n_scored)?;

    let weight_header = |w: &mut W| -> std::io::Result<()> {
        write!(w, "| Method |")?;
        for g in &gs {
            write!(w, " γ={g} ℓ² | γ={g} ℓ^∞ |")?;
        }
        writeln!(w)?;
        write!(w, "|---|")?;
        for _ in &gs {
            write!(w, "---|---|")?;
        }
        writeln!(w)
    };
    let norm_header = |w: &mut W| -> std::io::Result<()> {
        write!(w, "| Method |")?;
        for n in MatrixNorm::ALL {
            write!(w, " {n} |")?;
        }
        writeln!(w, "\n|---|---|---|---|---|")
    };

    writeln!(w, "## Efficient portfolio weight errors\n")?;
    weight_header(&mut w)?;
    for m in &methods {
        write!(w, "| {m} |")?;
        for &g in &gs {
            write!(
                w,
                " {} | {} |",
                cell(report.get(*m, "L2", Some(g))),
                cell(report.get(*m, "LInf", Some(g)))
            )?;
        }
        writeln!(w)?;
    }

    writeln!(w, "\n## Covariance matrix forecast errors\n")?;
    norm_header(&mut w)?;
    for m in &methods {
        write!(w, "| {m} |")?;
        for n in MatrixNorm::ALL {
            write!(w, " {} |", cell(report.get(*m, n.name(), None)))?;
        }
        writeln!(w)?;
    }

    if has_ci {
        writeln!(w, "\n## Bootstrap 95% intervals, weight errors\n")?;
        weight_header(&mut w)?;
        for m in &methods {
            write!(w, "| {m} |")?;
            for &g in &gs {
                write!(
                    w,
                    " {} | {} |",
                    interval_cell(report.get(*m, "L2", Some(g))),
                    interval_cell(report.get(*m, "LInf", Some(g)))
                )?;
            }
            writeln!(w)?;
        }
        writeln!(w, "\n## Bootstrap 95% intervals, matrix errors\n")?;
        norm_header(&mut w)?;
        for m in &methods {
            write!(w, "| {m} |")?;
            for n in MatrixNorm::ALL {
                write!(w, " {} |", interval_cell(report.get(*m, n.name(), None)))?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}
