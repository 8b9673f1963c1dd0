//! Text formats shared by the subcommands.

use std::fmt::Write as _;

/// Positional notation with 17 significant digits; scientific outside `[1e-5, 1e17)`.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..17).contains(&magnitude) {
        return format!("{x:.16e}");
    }
    let decimals = (16 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// One SVG 1.1 document with a single `<path>` per curve, y axis pointing up.
pub fn svg(curves: &[Vec<(f64, f64)>]) -> String {
    const WIDTH: f64 = 800.0;
    const HEIGHT: f64 = 600.0;
    const MARGIN: f64 = 20.0;
    let points = curves.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let span = |lo: f64, hi: f64| if hi > lo { hi - lo } else { 1.0 };
    let sx = (WIDTH - 2.0 * MARGIN) / span(x0, x1);
    let sy = (HEIGHT - 2.0 * MARGIN) / span(y0, y1);

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    for (i, curve) in curves.iter().enumerate() {
        let mut d = String::new();
        for (j, &(x, y)) in curve.iter().enumerate() {
            let px = MARGIN + (x - x0) * sx;
            let py = HEIGHT - MARGIN - (y - y0) * sy;
            let _ = write!(d, "{}{px:.3} {py:.3}", if j == 0 { "M" } else { " L" });
        }
        let _ = writeln!(
            out,
            r#"  <path d="{d}" fill="none" stroke="{}" stroke-width="1"/>"#,
            colors[i % colors.len()]
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(0.4), "0.40000000000000002");
        assert_eq!(num(1.0), "1.0000000000000000");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(12.5), "12.500000000000000");
        assert_eq!(num(1e-9), "1.0000000000000001e-9");
    }

    #[test]
    fn svg_has_one_path_per_curve() {
        let doc = svg(&[vec![(0.0, 0.0), (1.0, 1.0)], vec![(0.0, 1.0), (1.0, 0.0)]]);
        assert_eq!(doc.matches("<path").count(), 2);
        assert!(doc.contains(r#"version="1.1""#));
    }
}
