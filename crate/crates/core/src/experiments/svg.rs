use std::fmt::Write as _;

use super::power::PowerCurve;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Static line chart of power against `h`, one polyline per test.
pub fn power_curve_svg(curve: &PowerCurve) -> String {
    let h = &curve.config.h_grid;
    let (h_min, h_max) = h.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let span = if h_max > h_min { h_max - h_min } else { 1.0 };
    let px = |x: f64| MARGIN + (x - h_min) / span * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - y * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" stroke="black" fill="none"/>"#,
        x0 = px(h_min),
        x1 = px(h_min + span),
        y0 = py(0.0),
        y1 = py(1.0)
    );
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{tick}</text>"#,
            MARGIN - 6.0,
            py(tick) + 4.0
        );
    }
    for x in [h_min, h_min + span / 2.0, h_min + span] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{x:.2}</text>"#,
            px(x),
            HEIGHT - MARGIN + 18.0
        );
    }
    let c = &curve.config;
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle">d = {}, a = {}, n1 = {}, n2 = {}, alpha = {}</text>"#,
        WIDTH / 2.0,
        c.d,
        c.a,
        c.n1,
        c.n2,
        c.alpha
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">h</text>"#, WIDTH / 2.0, HEIGHT - 12.0);
    for (i, series) in curve.series.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let pts: Vec<String> = series
            .points
            .iter()
            .filter(|p| p.power.is_finite())
            .map(|p| format!("{:.2},{:.2}", px(p.h), py(p.power)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" stroke="{colour}" stroke-width="2" fill="none"/>"#,
            pts.join(" ")
        );
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{colour}">{}</text>"#,
            WIDTH - MARGIN - 60.0,
            series.test
        );
    }
    s.push_str("</svg>\n");
    s
}
