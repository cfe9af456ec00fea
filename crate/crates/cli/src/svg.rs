//! Minimal SVG line chart with a logarithmic BER axis.
//!
//! Points with zero BER cannot be drawn on a log axis; they split the
//! polyline and are left out.

use std::fmt::Write as _;

use gmud::BerCurve;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];
const DASHES: [&str; 2] = ["", "6,4"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders every curve as one polyline series.
pub fn render(curves: &[BerCurve], title: &str) -> String {
    let snrs = curves.iter().flat_map(|c| c.points.iter().map(|p| p.snr_db));
    let (mut x_lo, mut x_hi) = snrs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    });
    if !x_lo.is_finite() {
        (x_lo, x_hi) = (0.0, 1.0);
    }
    if x_hi <= x_lo {
        x_lo -= 1.0;
        x_hi += 1.0;
    }
    let min_ber = curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.ber))
        .filter(|&b| b > 0.0)
        .fold(1.0f64, f64::min);
    let decade_lo = min_ber.log10().floor().min(-1.0);
    let decade_hi = 0.0;

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |b: f64| TOP + (decade_hi - b.log10()) / (decade_hi - decade_lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    );

    // Decade grid lines and labels.
    let mut d = decade_lo as i32;
    while d as f64 <= decade_hi {
        let y = py(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
        d += 1;
    }
    // SNR ticks at roughly five even steps.
    let step = nice_step((x_hi - x_lo) / 5.0);
    let mut x = (x_lo / step).ceil() * step;
    while x <= x_hi + 1e-9 {
        let xp = px(x);
        let _ = writeln!(
            s,
            r##"<line x1="{xp:.2}" y1="{TOP}" x2="{xp:.2}" y2="{:.2}" stroke="#eee"/>"##,
            TOP + plot_h
        );
        let _ = writeln!(
            s,
            r#"<text x="{xp:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 16.0,
            trim_float(x)
        );
        x += step;
    }
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">SNR (dB)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">BER</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = DASHES[(i / PALETTE.len()) % DASHES.len()];
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(r#" stroke-dasharray="{dash}""#)
        };
        let mut segment: Vec<String> = Vec::new();
        let flush = |seg: &mut Vec<String>, s: &mut String| {
            if seg.len() > 1 {
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="2"{dash_attr} points="{}"/>"#,
                    seg.join(" ")
                );
            }
            seg.clear();
        };
        for p in &c.points {
            if p.ber > 0.0 {
                let (xp, yp) = (px(p.snr_db), py(p.ber));
                segment.push(format!("{xp:.2},{yp:.2}"));
                let _ = writeln!(s, r#"<circle cx="{xp:.2}" cy="{yp:.2}" r="3" fill="{color}"/>"#);
            } else {
                flush(&mut segment, &mut s);
            }
        }
        flush(&mut segment, &mut s);

        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + plot_w + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash_attr}/>"#,
            lx + 24.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 30.0,
            ly + 4.0,
            escape(&format!("{} ({})", c.scheme, c.feedback))
        );
    }
    s.push_str("</svg>\n");
    s
}

fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|&v| v >= raw)
        .unwrap_or(10.0 * mag)
}

fn trim_float(x: f64) -> String {
    let r = (x * 1000.0).round() / 1000.0;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}
