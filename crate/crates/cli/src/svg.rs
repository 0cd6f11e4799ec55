//! Fixed-size SVG line chart of the load voltage with the band edges and the
//! disturbance window shaded. A convenience view with no external assets.

use std::fmt::Write;

use reflexgrid::Band;

pub const WIDTH: f64 = 1000.0;
pub const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 40.0;
/// Above this many steps, each pixel column keeps only its minimum and maximum.
const MAX_POINTS: usize = 2000;

/// Chart of `v_load` over steps `0..v_load.len()`. `disturbance` is the
/// half-open step range to shade, if any.
pub fn render(v_load: &[f64], band: &Band, disturbance: Option<(u64, u64)>) -> String {
    let n = v_load.len().max(1);
    let lo = v_load.iter().cloned().fold(band.v_low, f64::min);
    let hi = v_load.iter().cloned().fold(band.v_high, f64::max);
    let pad = ((hi - lo) * 0.05).max(1e-9);
    let (lo, hi) = (lo - pad, hi + pad);
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let x = |t: f64| MARGIN + plot_w * t / n as f64;
    let y = |v: f64| MARGIN + plot_h * (hi - v) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    if let Some((start, end)) = disturbance.filter(|(a, b)| b > a) {
        let _ = writeln!(
            s,
            r##"<rect class="disturbance" x="{:.2}" y="{MARGIN}" width="{:.2}" height="{plot_h}" fill="#f4cccc"/>"##,
            x(start as f64),
            x(end as f64) - x(start as f64)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for (class, v, colour) in [
        ("v_low", band.v_low, "#888888"),
        ("v_high", band.v_high, "#888888"),
    ] {
        let _ = writeln!(
            s,
            r#"<polyline class="{class}" fill="none" stroke="{colour}" stroke-dasharray="4 3" points="{:.2},{:.2} {:.2},{:.2}"/>"#,
            x(0.0),
            y(v),
            x(n as f64),
            y(v)
        );
    }
    let mut points = String::new();
    for (t, v) in decimate(v_load) {
        let _ = write!(points, "{:.2},{:.2} ", x(t as f64), y(v));
    }
    let _ = writeln!(
        s,
        r##"<polyline class="v_load" fill="none" stroke="#1f4e9c" stroke-width="1" points="{}"/>"##,
        points.trim_end()
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{:.0}" font-family="sans-serif" font-size="12">v_load [{lo:.4}, {hi:.4}] V over {n} steps</text>"#,
        MARGIN - 12.0
    );
    s.push_str("</svg>\n");
    s
}

/// Points to draw: everything for short series, otherwise the first, minimum
/// and maximum sample of each bucket in time order.
fn decimate(v: &[f64]) -> Vec<(usize, f64)> {
    if v.len() <= MAX_POINTS {
        return v.iter().copied().enumerate().collect();
    }
    let buckets = MAX_POINTS / 2;
    let mut out = Vec::with_capacity(MAX_POINTS);
    for b in 0..buckets {
        let start = b * v.len() / buckets;
        let end = ((b + 1) * v.len() / buckets).max(start + 1);
        let slice = &v[start..end];
        let (mut imin, mut imax) = (0, 0);
        for (i, x) in slice.iter().enumerate() {
            if *x < slice[imin] {
                imin = i;
            }
            if *x > slice[imax] {
                imax = i;
            }
        }
        let (a, b) = if imin <= imax {
            (imin, imax)
        } else {
            (imax, imin)
        };
        out.push((start + a, slice[a]));
        if b != a {
            out.push((start + b, slice[b]));
        }
    }
    out
}
