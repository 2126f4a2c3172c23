//! Static SVG rendering of a reliability diagram.

use std::fmt::Write;

use crate::metrics::{DiagramKind, ReliabilityDiagram};

const SIZE: f64 = 400.0;
const PAD: f64 = 40.0;

fn x(v: f64) -> f64 {
    PAD + v * (SIZE - 2.0 * PAD)
}

fn y(v: f64) -> f64 {
    SIZE - PAD - v * (SIZE - 2.0 * PAD)
}

/// Diagonal, bin-count bars (parity diagrams only) and the observed curve.
pub fn reliability_svg(diagram: &ReliabilityDiagram, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        SIZE / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{w}" height="{w}" fill="none" stroke="black"/>"#,
        w = SIZE - 2.0 * PAD
    );

    if diagram.kind == DiagramKind::Parity && diagram.total > 0 {
        let max = diagram.bins.iter().map(|b| b.count).max().unwrap_or(1).max(1) as f64;
        for b in diagram.bins.iter().filter(|b| b.count > 0) {
            let h = b.count as f64 / max;
            let _ = writeln!(
                s,
                r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#9ecae1" opacity="0.5"/>"##,
                x(b.lo),
                y(h),
                x(b.hi) - x(b.lo),
                y(0.0) - y(h)
            );
        }
    }

    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="4 4"/>"#,
        x(0.0),
        y(0.0),
        x(1.0),
        y(1.0)
    );
    let points: Vec<String> = diagram
        .bins
        .iter()
        .filter_map(|b| Some(format!("{:.2},{:.2}", x(b.pred_avg?), y(b.obs_avg?))))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#d62728" stroke-width="2"/>"##,
        points.join(" ")
    );
    for p in &points {
        let (px, py) = p.split_once(',').expect("formatted above");
        let _ = writeln!(s, r##"<circle cx="{px}" cy="{py}" r="2.5" fill="#d62728"/>"##);
    }
    let (xl, yl) = match diagram.kind {
        DiagramKind::Parity => ("average prediction", "observed frequency"),
        DiagramKind::Quantile => ("quantile level", "observed coverage"),
    };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{xl}</text>"#,
        SIZE / 2.0,
        SIZE - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 14 {})">{yl}</text>"#,
        SIZE / 2.0,
        SIZE / 2.0
    );
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
