//! Minimal self-contained SVG emission: polyline charts and disc portraits.
//! Deterministic output (fixed float formatting, no external renderer).

use std::fmt::Write;

pub struct Series {
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn fmt(v: f64) -> String {
    format!("{v:.4}")
}

/// Scatter/line chart with axes, for fits and coefficient growth plots.
pub fn chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h) = (720.0, 480.0);
    let margin = 64.0;
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for s in series {
        for (x, y) in &s.points {
            if x.is_finite() && y.is_finite() {
                xs.push(*x);
                ys.push(*y);
            }
        }
    }
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let sx = |x: f64| margin + (x - x0) / (x1 - x0) * (w - 2.0 * margin);
    let sy = |y: f64| h - margin - (y - y0) / (y1 - y0) * (h - 2.0 * margin);
    let mut out = String::new();
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = write!(
        out,
        r#"<rect width="{w}" height="{h}" fill="white"/><text x="{}" y="24" text-anchor="middle" font-family="monospace" font-size="15">{title}</text>"#,
        w / 2.0
    );
    // Axes.
    let _ = write!(
        out,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{t}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = margin,
        b = h - margin,
        r = w - margin,
        t = margin
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = write!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="monospace" font-size="11">{}</text>"#,
            fmt(sx(fx)),
            h - margin + 18.0,
            fmt(fx)
        );
        let _ = write!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end" font-family="monospace" font-size="11">{}</text>"#,
            margin - 6.0,
            fmt(sy(fy) + 4.0),
            fmt(fy)
        );
    }
    let _ = write!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="monospace" font-size="12">{x_label}</text>"#,
        w / 2.0,
        h - 16.0
    );
    let _ = write!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" font-family="monospace" font-size="12" transform="rotate(-90 18 {})">{y_label}</text>"#,
        h / 2.0,
        h / 2.0
    );
    for s in series {
        let mut d = String::new();
        for (i, (x, y)) in s.points.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                continue;
            }
            let _ = write!(
                d,
                "{}{},{} ",
                if i == 0 { "M" } else { "L" },
                fmt(sx(*x)),
                fmt(sy(*y))
            );
        }
        let _ = write!(
            out,
            r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.4"/>"#,
            d.trim_end(),
            s.color
        );
    }
    out.push_str("</svg>");
    out
}

/// Portrait on the closed unit disc (the Poincare hemisphere seen from
/// above); input points are already disc-projected to [-1, 1]^2.
pub fn disc_portrait(title: &str, series: &[Series], marks: &[(f64, f64)]) -> String {
    let size = 640.0;
    let c = size / 2.0;
    let r = size / 2.0 - 24.0;
    let sx = |x: f64| c + x * r;
    let sy = |y: f64| c - y * r;
    let mut out = String::new();
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = write!(
        out,
        r#"<rect width="{size}" height="{size}" fill="white"/><circle cx="{c}" cy="{c}" r="{r}" fill="none" stroke="black" stroke-width="1.2"/><text x="{c}" y="16" text-anchor="middle" font-family="monospace" font-size="14">{title}</text>"#
    );
    // Real axis.
    let _ = write!(
        out,
        r##"<line x1="{}" y1="{c}" x2="{}" y2="{c}" stroke="#cccccc" stroke-width="0.8"/>"##,
        c - r,
        c + r
    );
    for s in series {
        let mut d = String::new();
        let mut first = true;
        for (x, y) in &s.points {
            if !x.is_finite() || !y.is_finite() {
                first = true;
                continue;
            }
            let _ = write!(
                d,
                "{}{},{} ",
                if first { "M" } else { "L" },
                fmt(sx(*x)),
                fmt(sy(*y))
            );
            first = false;
        }
        let _ = write!(
            out,
            r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.1"/>"#,
            d.trim_end(),
            s.color
        );
    }
    for (x, y) in marks {
        let _ = write!(
            out,
            r#"<circle cx="{}" cy="{}" r="3.2" fill="black"/>"#,
            fmt(sx(*x)),
            fmt(sy(*y))
        );
    }
    out.push_str("</svg>");
    out
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for x in v {
        lo = lo.min(*x);
        hi = hi.max(*x);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}
