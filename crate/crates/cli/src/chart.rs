//! Standalone SVG bar chart of comparison ratios.

use std::fmt::Write;

use crate::sweep::ComparisonRow;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 90.0;
const PALETTE: [&str; 6] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#b07aa1",
];

/// One group of bars per input, one bar per platform, ratio on the y axis
/// with a dashed reference line at 1.0. Input and platform order follow the
/// rows.
pub fn ratio_chart_svg(rows: &[ComparisonRow], title: &str) -> String {
    let inputs = unique(rows.iter().map(|r| r.input_name.as_str()));
    let platforms = unique(rows.iter().map(|r| r.platform_name.as_str()));
    let max_ratio = rows.iter().map(|r| r.ratio).fold(1.0, f64::max);
    let y_max = nice_ceiling(max_ratio * 1.1);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let y_of = |v: f64| MARGIN_TOP + plot_h * (1.0 - v / y_max);
    let group_w = plot_w / inputs.len().max(1) as f64;
    let bar_w = group_w * 0.8 / platforms.len().max(1) as f64;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    for i in 0..=4 {
        let v = y_max * i as f64 / 4.0;
        let y = y_of(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##,
            WIDTH - MARGIN_RIGHT
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"#,
            MARGIN_LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">energy ratio</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    for (gi, input) in inputs.iter().enumerate() {
        let gx = MARGIN_LEFT + group_w * gi as f64 + group_w * 0.1;
        for (pi, platform) in platforms.iter().enumerate() {
            let Some(row) = rows
                .iter()
                .find(|r| r.input_name == *input && r.platform_name == *platform)
            else {
                continue;
            };
            let x = gx + bar_w * pi as f64;
            let y = y_of(row.ratio);
            let _ = writeln!(
                svg,
                r#"<rect x="{x:.1}" y="{y:.1}" width="{bar_w:.1}" height="{:.1}" fill="{}"><title>{} on {}: {:.4}</title></rect>"#,
                (y_of(0.0) - y).max(0.0),
                PALETTE[pi % PALETTE.len()],
                escape(input),
                escape(platform),
                row.ratio
            );
        }
        let lx = MARGIN_LEFT + group_w * (gi as f64 + 0.5);
        let ly = HEIGHT - MARGIN_BOTTOM + 14.0;
        let _ = writeln!(
            svg,
            r#"<text x="{lx:.1}" y="{ly:.1}" transform="rotate(30 {lx:.1} {ly:.1})">{}</text>"#,
            escape(input)
        );
    }

    let ref_y = y_of(1.0);
    let _ = writeln!(
        svg,
        r##"<line x1="{MARGIN_LEFT}" y1="{ref_y:.1}" x2="{:.1}" y2="{ref_y:.1}" stroke="#333" stroke-dasharray="6 4"/>"##,
        WIDTH - MARGIN_RIGHT
    );
    let _ = writeln!(
        svg,
        r##"<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{:.1}" stroke="#333"/>"##,
        y_of(0.0)
    );

    for (pi, platform) in platforms.iter().enumerate() {
        let x = MARGIN_LEFT + 140.0 * pi as f64;
        let y = HEIGHT - 18.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{x:.1}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{y:.1}">{}</text>"#,
            y - 9.0,
            PALETTE[pi % PALETTE.len()],
            x + 14.0,
            escape(platform)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn unique<'a>(names: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for n in names {
        if !out.contains(&n) {
            out.push(n);
        }
    }
    out
}

/// Smallest 1, 2 or 5 times a power of ten not below `x`.
fn nice_ceiling(x: f64) -> f64 {
    let base = 10f64.powf(x.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * base)
        .find(|&v| v >= x)
        .unwrap_or(10.0 * base)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
