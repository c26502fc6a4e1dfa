use std::fmt::Write;

use dethunt::report::fmt_f64;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 20.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Data extents, widened when degenerate.
fn extent<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo > hi {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// A static plot with one polyline per `(times, values)` series. Time runs
/// left to right and values bottom to top.
pub fn polylines<'a>(series: impl Iterator<Item = (&'a [f64], &'a [f64])> + Clone) -> String {
    let (t0, t1) = extent(series.clone().flat_map(|(t, _)| t.iter()));
    let (v0, v1) = extent(series.clone().flat_map(|(_, v)| v.iter()));
    let sx = (WIDTH - 2.0 * MARGIN) / (t1 - t0);
    let sy = (HEIGHT - 2.0 * MARGIN) / (v1 - v0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {} {}" width="{}" height="{}">"#,
        fmt_f64(WIDTH),
        fmt_f64(HEIGHT),
        fmt_f64(WIDTH),
        fmt_f64(HEIGHT)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{m}" y="{m}" width="{w}" height="{h}" fill="none" stroke="#999"/>"##,
        m = fmt_f64(MARGIN),
        w = fmt_f64(WIDTH - 2.0 * MARGIN),
        h = fmt_f64(HEIGHT - 2.0 * MARGIN)
    );
    for (k, (ts, vs)) in series.enumerate() {
        let points: Vec<String> = ts
            .iter()
            .zip(vs)
            .filter(|(_, v)| v.is_finite())
            .map(|(t, v)| {
                let px = MARGIN + (t - t0) * sx;
                let py = HEIGHT - MARGIN - (v - v0) * sy;
                format!("{},{}", fmt_f64((px * 1e3).round() / 1e3), fmt_f64((py * 1e3).round() / 1e3))
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            COLORS[k % COLORS.len()],
            points.join(" ")
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corners_map_to_the_margins() {
        let ts = [0.0, 1.0];
        let vs = [2.0, 4.0];
        let s = polylines(std::iter::once((&ts[..], &vs[..])));
        assert!(s.contains(r#"points="20,380 620,20""#), "{s}");
        assert!(s.starts_with("<svg"));
        assert!(s.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn flat_series_gets_a_unit_window() {
        let ts = [0.0, 2.0];
        let vs = [1.0, 1.0];
        let s = polylines(std::iter::once((&ts[..], &vs[..])));
        assert!(s.contains(r#"points="20,200 620,200""#), "{s}");
    }
}
