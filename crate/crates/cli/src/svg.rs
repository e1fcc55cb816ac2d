//! Minimal log-x line chart writer.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn num(x: f64) -> String {
    format!("{x:.2}")
}

/// Renders line series and optional scatter points against a log-scaled x axis.
pub fn log_x_chart(title: &str, x_label: &str, lines: &[Series], scatter: Option<&Series>) -> String {
    let all = lines.iter().chain(scatter).flat_map(|s| s.points.iter()).filter(|p| p.0 > 0.0 && p.1.is_finite());
    let (mut x_lo, mut x_hi, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &(x, y) in all {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_hi = y_hi.max(y);
    }
    if !(x_lo < x_hi) {
        (x_lo, x_hi) = (1e-3, 1.0);
    }
    let y_hi = if y_hi > 0.0 { y_hi * 1.05 } else { 1.0 };
    let (lx0, lx1) = (x_lo.log10(), x_hi.log10());
    let px = |x: f64| MARGIN + (x.log10() - lx0) / (lx1 - lx0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - y / y_hi * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{title}</text>"#, WIDTH / 2.0);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" fill="none" stroke="black"/>"#
    );
    for decade in lx0.floor() as i32..=lx1.ceil() as i32 {
        let x = 10f64.powi(decade);
        if x < x_lo * 0.999 || x > x_hi * 1.001 {
            continue;
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">1e{decade}</text>"#,
            num(px(x)),
            bottom + 18.0
        );
    }
    for k in 0..=4 {
        let y = y_hi * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{y:.2}</text>"#, left - 6.0, num(py(y) + 4.0));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, WIDTH / 2.0, HEIGHT - 16.0);

    for (k, series) in lines.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = series
            .points
            .iter()
            .filter(|p| p.0 > 0.0 && p.1.is_finite())
            .map(|&(x, y)| format!("{},{}", num(px(x)), num(py(y))))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ly = top + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            right - 70.0,
            num(ly + 4.0),
            series.label
        );
    }
    if let Some(data) = scatter {
        for &(x, y) in &data.points {
            let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="4" fill="none" stroke="black"/>"#, num(px(x)), num(py(y)));
        }
    }
    s.push_str("</svg>\n");
    s
}
