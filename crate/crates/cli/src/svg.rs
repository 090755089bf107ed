//! Hand-written SVG line plots: one curve, optional dashed confidence bands
//! and a histogram rug of the conditioning feature.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 770.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 390.0;
const RUG_TOP: f64 = 425.0;
const RUG_BOTTOM: f64 = 470.0;
const RUG_BINS: usize = 30;

pub struct Band {
    pub label: String,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub dash: &'static str,
    pub colour: &'static str,
}

pub struct Plot<'a> {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub bands: Vec<Band>,
    pub rug: &'a [f64],
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    if r == 0.0 {
        "0".into()
    } else {
        r.to_string()
    }
}

pub fn render(p: &Plot) -> String {
    let (x0, x1) = span(p.x.iter().chain(p.rug).copied());
    let (y0, y1) =
        span(p.y.iter().copied().chain(p.bands.iter().flat_map(|b| b.lower.iter().chain(&b.upper).copied())));
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * (RIGHT - LEFT);
    let sy = |y: f64| BOTTOM - (y - y0) / (y1 - y0) * (BOTTOM - TOP);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, "<!-- descry {} -->", crate::io::VERSION).unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="28" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(&p.title)).unwrap();

    writeln!(s, r#"<g class="axes" stroke="black" stroke-width="1">"#).unwrap();
    writeln!(s, r#"<line x1="{LEFT}" y1="{BOTTOM}" x2="{RIGHT}" y2="{BOTTOM}"/>"#).unwrap();
    writeln!(s, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{BOTTOM}"/>"#).unwrap();
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        writeln!(s, r#"<line x1="{0:.2}" y1="{BOTTOM}" x2="{0:.2}" y2="{1:.2}"/>"#, sx(xv), BOTTOM + 5.0).unwrap();
        writeln!(s, r#"<line x1="{0:.2}" y1="{1:.2}" x2="{LEFT}" y2="{1:.2}"/>"#, LEFT - 5.0, sy(yv)).unwrap();
    }
    writeln!(s, "</g>").unwrap();
    writeln!(s, r#"<g class="tick-labels" fill="black">"#).unwrap();
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, sx(xv), BOTTOM + 18.0, tick_label(xv)).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, sy(yv) + 4.0, tick_label(yv)).unwrap();
    }
    writeln!(s, "</g>").unwrap();
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (LEFT + RIGHT) / 2.0, RUG_TOP - 8.0, escape(&p.x_label)).unwrap();
    writeln!(
        s,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
        (TOP + BOTTOM) / 2.0,
        escape(&p.y_label)
    )
    .unwrap();

    for band in &p.bands {
        let mut pts: Vec<String> = Vec::new();
        for (x, lo) in p.x.iter().zip(&band.lower) {
            pts.push(format!("{:.2},{:.2}", sx(*x), sy(*lo)));
        }
        for (x, hi) in p.x.iter().zip(&band.upper).rev() {
            pts.push(format!("{:.2},{:.2}", sx(*x), sy(*hi)));
        }
        writeln!(
            s,
            r#"<polygon class="band" points="{}" fill="{}" fill-opacity="0.12" stroke="{}" stroke-width="1.5" stroke-dasharray="{}"><title>{}</title></polygon>"#,
            pts.join(" "),
            band.colour,
            band.colour,
            band.dash,
            escape(&band.label)
        )
        .unwrap();
    }

    let line: Vec<String> = p.x.iter().zip(p.y).map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
    writeln!(s, r#"<polyline class="estimate" points="{}" fill="none" stroke="black" stroke-width="2"/>"#, line.join(" "))
        .unwrap();
    for (x, y) in p.x.iter().zip(p.y) {
        writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="black"/>"#, sx(*x), sy(*y)).unwrap();
    }

    if !p.rug.is_empty() {
        let mut counts = [0usize; RUG_BINS];
        for &v in p.rug.iter().filter(|v| v.is_finite()) {
            let b = (((v - x0) / (x1 - x0)) * RUG_BINS as f64).floor() as isize;
            counts[b.clamp(0, RUG_BINS as isize - 1) as usize] += 1;
        }
        let max = *counts.iter().max().unwrap_or(&1) as f64;
        let bin_width = (RIGHT - LEFT) / RUG_BINS as f64;
        writeln!(s, r##"<g class="rug" fill="#777777">"##).unwrap();
        for (b, &c) in counts.iter().enumerate().filter(|(_, &c)| c > 0) {
            let h = (RUG_BOTTOM - RUG_TOP) * c as f64 / max;
            writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"><title>{c}</title></rect>"#,
                LEFT + b as f64 * bin_width,
                RUG_BOTTOM - h,
                bin_width - 1.0,
                h
            )
            .unwrap();
        }
        writeln!(s, "</g>").unwrap();
    }

    let mut ly = TOP + 8.0;
    writeln!(s, r#"<g class="legend">"#).unwrap();
    writeln!(s, r#"<line x1="{0}" y1="{ly}" x2="{1}" y2="{ly}" stroke="black" stroke-width="2"/>"#, RIGHT - 190.0, RIGHT - 165.0)
        .unwrap();
    writeln!(s, r#"<text x="{}" y="{}">estimate</text>"#, RIGHT - 158.0, ly + 4.0).unwrap();
    for band in &p.bands {
        ly += 18.0;
        writeln!(
            s,
            r#"<line x1="{0}" y1="{ly}" x2="{1}" y2="{ly}" stroke="{2}" stroke-width="1.5" stroke-dasharray="{3}"/>"#,
            RIGHT - 190.0,
            RIGHT - 165.0,
            band.colour,
            band.dash
        )
        .unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, RIGHT - 158.0, ly + 4.0, escape(&band.label)).unwrap();
    }
    writeln!(s, "</g>").unwrap();
    s.push_str("</svg>\n");
    s
}
