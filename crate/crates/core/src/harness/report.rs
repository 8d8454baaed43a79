use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::harness::audit::AuditReport;
use crate::harness::experiment::{PsiTable, WelfareStats};

/// Writes serializable rows as CSV with a header line.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

fn opt(value: Option<f64>) -> String {
    value.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"))
}

pub fn welfare_summary(stats: &WelfareStats) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "packer: {}", stats.packer);
    let _ = writeln!(s, "bidders: {}", stats.bidders);
    let _ = writeln!(s, "epsilon: {}", stats.epsilon);
    let _ = writeln!(s, "trials: {}", stats.welfare.count);
    let _ = writeln!(
        s,
        "welfare mean: {:.6} (se {:.6})",
        stats.welfare.mean, stats.welfare.std_error
    );
    let _ = writeln!(
        s,
        "revenue mean: {:.6} (se {:.6})",
        stats.revenue.mean, stats.revenue.std_error
    );
    let _ = writeln!(s, "optimum: {}", opt(stats.optimum));
    let _ = writeln!(s, "ratio to optimum: {}", opt(stats.ratio));
    let _ = writeln!(s, "psi: {}", opt(stats.psi));
    let _ = writeln!(s, "floor factor: {}", opt(stats.floor_factor));
    let _ = writeln!(s, "floor: {}", opt(stats.floor));
    let floor = match stats.meets_floor() {
        Some(true) => "met",
        Some(false) => "MISSED",
        None => "not evaluated",
    };
    let _ = writeln!(s, "floor check (3 se): {floor}");
    let _ = writeln!(
        s,
        "trials with revenue > welfare: {}",
        stats.revenue_above_welfare
    );
    let _ = writeln!(s, "infeasible outcomes: {}", stats.infeasible_outcomes);
    let _ = writeln!(
        s,
        "result: {}",
        if stats.passed() { "PASS" } else { "FAIL" }
    );
    s
}

pub fn audit_summary(report: &AuditReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "comparisons: {}", report.entries.len());
    let _ = writeln!(s, "violations: {}", report.violation_count());
    let _ = writeln!(s, "max violation: {:.6e}", report.max_violation);
    for v in &report.violations {
        let _ = writeln!(
            s,
            "  replay: tape_seed={} bidder={} bid={} gain={:.6e}",
            v.tape_seed,
            v.bidder,
            v.deviation,
            v.gain()
        );
    }
    let _ = writeln!(
        s,
        "result: {}",
        if report.passed() { "PASS" } else { "FAIL" }
    );
    s
}

pub fn psi_summary(table: &PsiTable) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "packer: {}", table.packer);
    let _ = writeln!(s, "instances: {}", table.rows.len());
    let _ = writeln!(s, "advertised psi: {}", opt(table.advertised));
    let _ = writeln!(s, "min ratio: {:.6}", table.min_ratio);
    let _ = writeln!(s, "mean ratio: {:.6}", table.mean_ratio);
    let _ = writeln!(
        s,
        "infeasible outputs: {}",
        table.rows.iter().filter(|r| !r.feasible).count()
    );
    let _ = writeln!(
        s,
        "result: {}",
        if table.passed() { "PASS" } else { "FAIL" }
    );
    s
}

/// A standalone SVG line chart of `series` against its index, with an
/// optional dashed horizontal reference line.
pub fn line_chart(
    title: &str,
    y_label: &str,
    series: &[f64],
    reference: Option<(f64, &str)>,
) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 56.0;
    let mut lo = series.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if let Some((r, _)) = reference {
        lo = lo.min(r);
        hi = hi.max(r);
    }
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let span = (series.len().max(2) - 1) as f64;
    let x = |i: usize| PAD + (W - 2.0 * PAD) * i as f64 / span;
    let y = |v: f64| H - PAD - (H - 2.0 * PAD) * (v - lo) / (hi - lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<path d="M{PAD} {PAD} V{b} H{r}" fill="none" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let _ = writeln!(
        svg,
        r#"<text x="{PAD}" y="{}" font-family="sans-serif" font-size="11">{hi:.4}</text>"#,
        PAD - 6.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{PAD}" y="{}" font-family="sans-serif" font-size="11">{lo:.4}</text>"#,
        H - PAD + 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="12" y="{}" font-family="sans-serif" font-size="12" transform="rotate(-90 12 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    if !series.is_empty() {
        let points: Vec<String> = series
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", x(i), y(v)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
            points.join(" ")
        );
    }
    if let Some((r, label)) = reference {
        let _ = writeln!(
            svg,
            r#"<line x1="{PAD}" y1="{yr:.2}" x2="{}" y2="{yr:.2}" stroke="firebrick" stroke-dasharray="6 4"/>"#,
            W - PAD,
            yr = y(r)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11" fill="firebrick">{}</text>"#,
            W - PAD,
            y(r) - 4.0,
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Running mean of `samples`, summed in order.
pub fn running_mean(samples: &[f64]) -> Vec<f64> {
    let mut total = 0.0;
    samples
        .iter()
        .enumerate()
        .map(|(i, v)| {
            total += v;
            total / (i + 1) as f64
        })
        .collect()
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}
