//! Static SVG line chart of two table columns.

use std::fmt::Write as _;

use crate::error::CliError;
use crate::run::Table;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;

fn range(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn line_chart(table: &Table, x: &str, y: &str) -> Result<String, CliError> {
    let missing = |c: &str| CliError::Validation(format!("no column named {c:?} to plot"));
    let xs = table.column(x).ok_or_else(|| missing(x))?;
    let ys = table.column(y).ok_or_else(|| missing(y))?;
    if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
        return Err(CliError::Numerical("cannot plot non-finite values".into()));
    }
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    let px = |v: f64| MARGIN + (v - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |v: f64| HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<path d="M{m} {b} H{r} M{m} {b} V{m}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let points: Vec<String> = xs
        .iter()
        .zip(&ys)
        .map(|(&a, &b)| format!("{:.3},{:.3}", px(a), py(b)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" stroke="steelblue" stroke-width="1.5" fill="none"/>"#,
        points.join(" ")
    );
    let label = |out: &mut String, xp: f64, yp: f64, anchor: &str, text: &str| {
        let _ = writeln!(
            out,
            r#"<text x="{xp:.1}" y="{yp:.1}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{}</text>"#,
            escape(text)
        );
    };
    label(
        &mut out,
        MARGIN,
        HEIGHT - MARGIN + 16.0,
        "middle",
        &format!("{x0:.4}"),
    );
    label(
        &mut out,
        WIDTH - MARGIN,
        HEIGHT - MARGIN + 16.0,
        "middle",
        &format!("{x1:.4}"),
    );
    label(
        &mut out,
        MARGIN - 6.0,
        HEIGHT - MARGIN,
        "end",
        &format!("{y0:.4}"),
    );
    label(
        &mut out,
        MARGIN - 6.0,
        MARGIN + 4.0,
        "end",
        &format!("{y1:.4}"),
    );
    label(&mut out, WIDTH / 2.0, HEIGHT - 12.0, "middle", x);
    label(&mut out, 14.0, HEIGHT / 2.0, "middle", y);
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_has_one_vertex_per_row() {
        let table = Table {
            columns: vec!["t".into(), "v".into()],
            rows: vec![vec![0.0, 1.0], vec![1.0, 0.5], vec![2.0, 0.25]],
        };
        let svg = line_chart(&table, "t", "v").unwrap();
        let poly = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        assert_eq!(poly.matches(',').count(), 3);
        assert!(line_chart(&table, "t", "missing").is_err());
    }

    #[test]
    fn flat_series_does_not_divide_by_zero() {
        let table = Table {
            columns: vec!["t".into(), "v".into()],
            rows: vec![vec![0.0, 1.0], vec![1.0, 1.0]],
        };
        assert!(!line_chart(&table, "t", "v").unwrap().contains("NaN"));
    }
}
