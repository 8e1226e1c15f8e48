//! Static SVG boxplots of absolute residuals, one box per model.

use std::fmt::Write as _;

use crate::eval::BoxplotSummary;

const WIDTH_PER_BOX: f64 = 120.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 40.0;
const TICKS: usize = 5;

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders `(label, summary)` pairs as a self-contained SVG document.
pub fn boxplot_svg(title: &str, boxes: &[(String, BoxplotSummary)]) -> String {
    let width = MARGIN_LEFT + WIDTH_PER_BOX * boxes.len().max(1) as f64 + 20.0;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let top = boxes.iter().map(|(_, b)| b.max).fold(0.0, f64::max);
    let top = if top > 0.0 { top * 1.05 } else { 1.0 };
    let y = |v: f64| MARGIN_TOP + plot_h * (1.0 - v / top);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{HEIGHT:.0}" viewBox="0 0 {width:.0} {HEIGHT:.0}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        width / 2.0,
        escape(title)
    )
    .unwrap();
    writeln!(
        s,
        r#"<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{:.1}" stroke="black"/>"#,
        MARGIN_TOP + plot_h
    )
    .unwrap();
    for t in 0..=TICKS {
        let v = top * t as f64 / TICKS as f64;
        let ty = y(v);
        writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ty:.1}" x2="{MARGIN_LEFT}" y2="{ty:.1}" stroke="black"/>"#,
            MARGIN_LEFT - 5.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.0}</text>"#,
            MARGIN_LEFT - 8.0,
            ty + 4.0
        )
        .unwrap();
    }

    for (i, (label, b)) in boxes.iter().enumerate() {
        let cx = MARGIN_LEFT + WIDTH_PER_BOX * (i as f64 + 0.5);
        let half = WIDTH_PER_BOX * 0.25;
        let cap = half * 0.5;
        writeln!(s, r#"<g class="box" data-model="{}">"#, escape(label)).unwrap();
        for (from, to) in [(b.lower_whisker, b.q1), (b.q3, b.upper_whisker)] {
            writeln!(s, r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="black" stroke-dasharray="4 2"/>"#, y(from), y(to)).unwrap();
        }
        for w in [b.lower_whisker, b.upper_whisker] {
            writeln!(
                s,
                r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
                cx - cap,
                y(w),
                cx + cap,
                y(w)
            )
            .unwrap();
        }
        writeln!(
            s,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="#dde6f0" stroke="black"/>"##,
            cx - half,
            y(b.q3),
            2.0 * half,
            (y(b.q1) - y(b.q3)).max(0.5)
        )
        .unwrap();
        writeln!(s, r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black" stroke-width="2"/>"#, cx - half, y(b.median), cx + half, y(b.median)).unwrap();
        for o in &b.outliers {
            writeln!(
                s,
                r#"<circle cx="{cx:.1}" cy="{:.1}" r="3" fill="none" stroke="black"/>"#,
                y(*o)
            )
            .unwrap();
        }
        writeln!(
            s,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            HEIGHT - 15.0,
            escape(label)
        )
        .unwrap();
        writeln!(s, "</g>").unwrap();
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::boxplot_summary;

    #[test]
    fn one_group_per_model_with_outliers() {
        let boxes = vec![
            (
                "FMT".to_string(),
                boxplot_summary(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap(),
            ),
            (
                "A&B".to_string(),
                boxplot_summary(&[5.0, 6.0, 7.0]).unwrap(),
            ),
        ];
        let svg = boxplot_svg("Absolute residuals", &boxes);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches(r#"class="box""#).count(), 2);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains("A&amp;B"));
        assert!(!svg.contains("<script"));
    }

    #[test]
    fn all_zero_residuals_render() {
        let boxes = vec![("x".to_string(), boxplot_summary(&[0.0, 0.0]).unwrap())];
        assert!(!boxplot_svg("t", &boxes).contains("NaN"));
    }
}
