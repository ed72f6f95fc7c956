//! Metric tables and bar charts for `dodona eval`.

use std::fmt::Write;

use crate::oracle::Evaluation;

pub struct Row {
    pub task_id: String,
    pub family: String,
    pub metric: f64,
    pub datapoints: usize,
}

/// One row per task, in task-id order. The family is the task id's prefix.
pub fn rows(eval: &Evaluation) -> Vec<Row> {
    eval.tasks
        .iter()
        .map(|(id, m)| Row {
            task_id: id.clone(),
            family: id.split('/').next().unwrap_or("").to_owned(),
            metric: m.metric,
            datapoints: m.datapoints,
        })
        .collect()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

pub fn csv(rows: &[Row]) -> String {
    let mut out = String::from("task_id,family,metric,datapoints\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.6},{}",
            csv_field(&r.task_id),
            csv_field(&r.family),
            r.metric,
            r.datapoints
        );
    }
    out
}

pub const POSITIVE: &str = "#2ca02c";
pub const NEGATIVE: &str = "#d62728";

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A horizontal bar per task around a zero axis. Positive metrics are
/// green, negative red.
pub fn svg(rows: &[Row]) -> String {
    const ROW_H: f64 = 18.0;
    const LABEL_W: f64 = 260.0;
    const PLOT_W: f64 = 400.0;
    const PAD: f64 = 20.0;
    let extent = rows
        .iter()
        .map(|r| r.metric.abs())
        .filter(|m| m.is_finite())
        .fold(0.0f64, f64::max)
        .max(1e-9);
    let scale = PLOT_W / 2.0 / extent;
    let zero = LABEL_W + PLOT_W / 2.0;
    let width = LABEL_W + PLOT_W + 2.0 * PAD;
    let height = ROW_H * rows.len() as f64 + 2.0 * PAD;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    for (i, r) in rows.iter().enumerate() {
        let y = PAD + ROW_H * i as f64;
        let m = if r.metric.is_finite() { r.metric } else { 0.0 };
        let len = (m.abs() * scale).max(0.5);
        let x = if m >= 0.0 { zero } else { zero - len };
        let color = if m >= 0.0 { POSITIVE } else { NEGATIVE };
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LABEL_W - 6.0,
            y + ROW_H * 0.7,
            escape(&r.task_id)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{:.1}" width="{len:.2}" height="{:.1}" fill="{color}"><title>{:.4}</title></rect>"#,
            y + 2.0,
            ROW_H - 4.0,
            r.metric
        );
    }
    let _ = writeln!(
        out,
        r#"<line x1="{zero}" y1="{PAD}" x2="{zero}" y2="{:.1}" stroke="black"/>"#,
        height - PAD
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, metric: f64) -> Row {
        Row {
            task_id: id.into(),
            family: "f".into(),
            metric,
            datapoints: 3,
        }
    }

    #[test]
    fn csv_rows() {
        let text = csv(&[row("f/a", 0.5), row("f/b,c", -1.0)]);
        assert_eq!(text, "task_id,family,metric,datapoints\nf/a,f,0.500000,3\n\"f/b,c\",f,-1.000000,3\n");
    }

    #[test]
    fn bar_colors_follow_sign() {
        let s = svg(&[row("f/a", 0.5), row("f/b", -0.25)]);
        assert_eq!(s.matches(POSITIVE).count(), 1);
        assert_eq!(s.matches(NEGATIVE).count(), 1);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
    }
}
