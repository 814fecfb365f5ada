//! Filled-contour SVG rendering of fidelity maps.
//!
//! Grid cells are filled by the decade of their infidelity (the same decades
//! as the contour levels, `1-F = 10^{-m}`), contour lines from the
//! marching-squares extractor are drawn on top with their `m` labels. The
//! output is plain SVG text, byte-deterministic for identical inputs.

use std::fmt::Write;

use crate::scan::{ContourSet, FidelityMap};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 110.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;

/// Infidelity is clamped here before taking logarithms, so the exact origin
/// renders as the deepest bucket instead of -inf.
const INFIDELITY_FLOOR: f64 = 1e-16;

/// Fill colors per infidelity decade, shallow (1e-1) to deep (1e-10 and
/// below).
const RAMP: [&str; 10] = [
    "#2a0b59", "#46327e", "#365c8d", "#277f8e", "#1fa187", "#4ac16d", "#a0da39", "#fde725",
    "#fff3a0", "#ffffff",
];

fn bucket(infidelity: f64) -> usize {
    let m = -infidelity.max(INFIDELITY_FLOOR).log10();
    (m.floor() as usize).clamp(1, RAMP.len()) - 1
}

/// Render a fidelity map and its contour set as a filled-contour SVG plot,
/// ε_A horizontal and δ vertical.
pub fn render_fidelity_map(map: &FidelityMap, contours: &ContourSet, title: &str) -> String {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let (ex0, ex1) = map.grid.eps_a_range;
    let (dy0, dy1) = map.grid.delta_range;
    let to_px = |eps_a: f64, delta: f64| -> (f64, f64) {
        let x = MARGIN_LEFT + (eps_a - ex0) / (ex1 - ex0) * plot_w;
        let y = MARGIN_TOP + (dy1 - delta) / (dy1 - dy0) * plot_h;
        (x, y)
    };

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = write!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = write!(
        svg,
        r#"<text x="{:.1}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        xml_escape(title)
    );

    // Filled cells, one rect per grid point.
    let eps = map.grid.eps_values();
    let delta = map.grid.delta_values();
    let cell_w = plot_w / (eps.len() - 1) as f64;
    let cell_h = plot_h / (delta.len() - 1) as f64;
    for (i, &ea) in eps.iter().enumerate() {
        for (j, &d) in delta.iter().enumerate() {
            let (x, y) = to_px(ea, d);
            let color = RAMP[bucket(1.0 - map.value(i, j))];
            let _ = write!(
                svg,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
                x - cell_w / 2.0,
                y - cell_h / 2.0,
                cell_w,
                cell_h
            );
        }
    }

    // Contour lines with decade labels.
    for (level, lines) in contours.levels.iter().zip(&contours.polylines) {
        let m = -level.log10();
        for line in lines {
            if line.len() < 2 {
                continue;
            }
            let mut points = String::new();
            for &(ea, d) in line {
                let (x, y) = to_px(ea, d);
                let _ = write!(points, "{:.2},{:.2} ", x, y);
            }
            let _ = write!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="black" stroke-width="1.1"/>"#,
                points.trim_end()
            );
            let mid = line[line.len() / 2];
            let (x, y) = to_px(mid.0, mid.1);
            let _ = write!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" fill="black" stroke="white" stroke-width="2.5" paint-order="stroke" text-anchor="middle">{m:.0}</text>"#,
                x,
                y - 3.0
            );
        }
    }

    // Frame and axes.
    let _ = write!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let ea = ex0 + (ex1 - ex0) * k as f64 / 4.0;
        let (x, _) = to_px(ea, dy0);
        let _ = write!(
            svg,
            r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/>"#,
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 5.0
        );
        let _ = write!(
            svg,
            r#"<text x="{x:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">{ea:.2}</text>"#,
            MARGIN_TOP + plot_h + 20.0
        );
        let d = dy0 + (dy1 - dy0) * k as f64 / 4.0;
        let (_, y) = to_px(ex0, d);
        let _ = write!(
            svg,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="black"/>"#,
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT
        );
        let _ = write!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="end">{d:.2}</text>"#,
            MARGIN_LEFT - 9.0,
            y + 4.0
        );
    }
    let _ = write!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">pulse-area error ε_A</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = write!(
        svg,
        r#"<text x="18" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.1})">detuning δ</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    // Legend for the fill decades.
    let lx = WIDTH - MARGIN_RIGHT + 18.0;
    for (idx, color) in RAMP.iter().enumerate() {
        let y = MARGIN_TOP + idx as f64 * 22.0;
        let _ = write!(
            svg,
            r#"<rect x="{lx:.1}" y="{y:.1}" width="16" height="16" fill="{color}" stroke="black" stroke-width="0.4"/>"#
        );
        let label = if idx + 1 == RAMP.len() {
            format!("1-F &lt; 1e-{}", idx + 1)
        } else {
            format!("1e-{} .. 1e-{}", idx + 2, idx + 1)
        };
        let _ = write!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10">{label}</text>"#,
            lx + 22.0,
            y + 12.0
        );
    }

    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::generate_sequence;
    use crate::pulse::{IntegratorConfig, PulseEnvelope};
    use crate::scan::{extract_contours, scan, ScanGrid};
    use std::f64::consts::PI;

    #[test]
    fn renders_valid_svg_with_contours() {
        let seq = generate_sequence(4, PI / 2.0).unwrap();
        let grid = ScanGrid {
            n_eps: 25,
            n_delta: 25,
            ..ScanGrid::default()
        };
        let map = scan(
            &seq,
            &grid,
            &PulseEnvelope::rectangular(PI),
            &IntegratorConfig::default(),
        )
        .unwrap();
        let contours = extract_contours(&map, &[1e-2, 1e-3, 1e-4]);
        let svg = render_fidelity_map(&map, &contours, "test map");
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("test map"));
        // Deterministic output.
        let again = render_fidelity_map(&map, &contours, "test map");
        assert_eq!(svg, again);
    }

    #[test]
    fn bucket_clamps_at_floor() {
        assert_eq!(bucket(0.0), RAMP.len() - 1);
        assert_eq!(bucket(0.5), 0);
        // 5e-3 lies in the [1e-3, 1e-2) decade.
        assert_eq!(bucket(5e-3), 1);
    }
}
