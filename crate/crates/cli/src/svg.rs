use std::fmt::Write as _;

use chrono::NaiveDate;

const W: f64 = 800.0;
const H: f64 = 360.0;
const PAD: f64 = 48.0;
const COLORS: [&str; 4] = ["#c0392b", "#2471a3", "#229954", "#7d3c98"];

/// Static line chart: one polyline per series over a shared date axis.
pub fn line_chart(title: &str, dates: &[NaiveDate], series: &[(&str, &[f64])]) -> String {
    let ymax = series
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let n = dates.len().max(2) - 1;
    let x = |i: usize| PAD + (W - 2.0 * PAD) * i as f64 / n as f64;
    let y = |v: f64| H - PAD - (H - 2.0 * PAD) * v / ymax;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{PAD}" y="24" font-size="14">{}</text>"#,
        escape(title)
    );
    let (x0, x1, y0, y1) = (PAD, W - PAD, H - PAD, PAD);
    let _ = writeln!(
        out,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">{ymax:.1}</text>"#,
        x0 - 4.0,
        y1 + 4.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">0</text>"#,
        x0 - 4.0,
        y0 + 4.0
    );
    if let (Some(first), Some(last)) = (dates.first(), dates.last()) {
        let _ = writeln!(out, r#"<text x="{x0}" y="{}">{first}</text>"#, y0 + 18.0);
        let _ = writeln!(
            out,
            r#"<text x="{x1}" y="{}" text-anchor="end">{last}</text>"#,
            y0 + 18.0
        );
    }
    for (k, (name, values)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", x(i), y(v)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}" text-anchor="end">{}</text>"#,
            x1,
            24.0 + 14.0 * k as f64,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
