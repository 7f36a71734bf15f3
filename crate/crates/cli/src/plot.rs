//! Static SVG for sweep results.

use std::fmt::Write;

/// One Newton run in the plot.
#[derive(Debug, Clone)]
pub struct Series {
    pub fraction: f64,
    pub converged: bool,
    /// `‖x_k − x*‖`; nonpositive entries are drawn at the floor.
    pub errors: Vec<f64>,
}

const W: f64 = 880.0;
const H: f64 = 420.0;
const FLOOR_EXP: f64 = -17.0;

const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Left: `log10 ‖x_k − x*‖` against `k` for every run. Right: one bar per
/// start fraction, green if the run converged, with the radius `r` marked.
pub fn sweep_svg(title: &str, series: &[Series]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, esc(title));

    // error panel
    let (x0, y0, pw, ph) = (60.0, 40.0, 480.0, 330.0);
    let kmax = series.iter().map(|s| s.errors.len()).max().unwrap_or(1).max(2) - 1;
    let exps: Vec<f64> = series
        .iter()
        .flat_map(|s| s.errors.iter())
        .map(|&e| if e > 0.0 { e.log10().max(FLOOR_EXP) } else { FLOOR_EXP })
        .collect();
    let top = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil().max(FLOOR_EXP + 1.0);
    let px = |k: f64| x0 + pw * k / kmax as f64;
    let py = |e: f64| y0 + ph * (top - e) / (top - FLOOR_EXP);
    let _ = writeln!(s, r#"<rect x="{x0}" y="{y0}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let mut e = FLOOR_EXP;
    while e <= top {
        let y = py(e);
        let _ = writeln!(s, r##"<line x1="{x0}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##, x0 + pw);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">1e{e}</text>"#, x0 - 4.0, y + 4.0);
        e += 4.0;
    }
    for k in 0..=kmax {
        if kmax <= 20 || k % (kmax / 10).max(1) == 0 {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{k}</text>"#,
                px(k as f64),
                y0 + ph + 16.0
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">iteration k</text>"#,
        x0 + pw / 2.0,
        y0 + ph + 34.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(14 {:.1}) rotate(-90)" text-anchor="middle">log10 error</text>"#,
        y0 + ph / 2.0
    );
    for (i, run) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = run
            .errors
            .iter()
            .enumerate()
            .map(|(k, &err)| {
                let ex = if err > 0.0 { err.log10().max(FLOOR_EXP) } else { FLOOR_EXP };
                format!("{:.1},{:.1}", px(k as f64), py(ex))
            })
            .collect();
        let dash = if run.converged { "" } else { r#" stroke-dasharray="5 3""# };
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}><title>{:.4}·r</title></polyline>"#,
            pts.join(" "),
            run.fraction
        );
    }

    // convergence bar panel
    let (bx, by, bw, bh) = (600.0, 40.0, 250.0, 330.0);
    let fmax = series.iter().map(|s| s.fraction).fold(1.0, f64::max) * 1.05;
    let fx = |f: f64| bx + bw * f / fmax;
    let _ = writeln!(s, r#"<rect x="{bx}" y="{by}" width="{bw}" height="{bh}" fill="none" stroke="black"/>"#);
    let bar_w = (bw / (series.len().max(1) as f64 * 2.0)).clamp(2.0, 14.0);
    for run in series {
        let color = if run.converged { "#2ca02c" } else { "#d62728" };
        let _ = writeln!(
            s,
            r#"<rect x="{:.1}" y="{:.1}" width="{bar_w:.1}" height="{:.1}" fill="{color}"><title>{:.4}·r</title></rect>"#,
            fx(run.fraction) - bar_w / 2.0,
            by + bh * 0.2,
            bh * 0.6,
            run.fraction
        );
    }
    let _ = writeln!(
        s,
        r##"<line x1="{:.1}" y1="{by}" x2="{:.1}" y2="{:.1}" stroke="#333" stroke-dasharray="4 4"/>"##,
        fx(1.0),
        fx(1.0),
        by + bh
    );
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">r</text>"#, fx(1.0), by - 4.0);
    for f in [0.0, 0.5, 1.0] {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{f}</text>"#, fx(f), by + bh + 16.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">‖x0 − x*‖ / r</text>"#,
        bx + bw / 2.0,
        by + bh + 34.0
    );
    let _ = writeln!(s, r##"<rect x="{bx}" y="{:.1}" width="10" height="10" fill="#2ca02c"/>"##, by + 6.0);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">converged</text>"#, bx + 14.0, by + 15.0);
    let _ = writeln!(s, r##"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="#d62728"/>"##, bx + 90.0, by + 6.0);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">not converged</text>"#, bx + 104.0, by + 15.0);
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_well_formed_enough() {
        let svg = sweep_svg(
            "a < b & c",
            &[
                Series { fraction: 0.5, converged: true, errors: vec![0.3, 0.01, 1e-6, 0.0] },
                Series { fraction: 1.0, converged: false, errors: vec![0.6, 0.6, 0.6] },
            ],
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a &lt; b &amp; c"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn empty_sweep_still_renders() {
        let svg = sweep_svg("empty", &[]);
        assert!(svg.contains("</svg>"));
        assert!(!svg.contains("NaN"));
    }
}
