//! Deterministic SVG heatmaps: a grid of filled cells with a fixed
//! colormap, axis labels and a value range annotation. Byte-for-byte
//! reproducible for identical inputs.

use std::fmt::Write as _;

/// Viridis-like colormap anchors (RGB, 0..255).
const ANCHORS: [(u8, u8, u8); 9] = [
    (68, 1, 84),
    (72, 40, 120),
    (62, 74, 137),
    (49, 104, 142),
    (38, 130, 142),
    (31, 158, 137),
    (53, 183, 121),
    (109, 205, 89),
    (253, 231, 37),
];

fn colormap(t: f64) -> (u8, u8, u8) {
    let t = t.clamp(0.0, 1.0) * (ANCHORS.len() - 1) as f64;
    let i = (t as usize).min(ANCHORS.len() - 2);
    let f = t - i as f64;
    let (r0, g0, b0) = ANCHORS[i];
    let (r1, g1, b1) = ANCHORS[i + 1];
    let lerp = |a: u8, b: u8| (a as f64 + f * (b as f64 - a as f64)).round() as u8;
    (lerp(r0, r1), lerp(g0, g1), lerp(b0, b1))
}

/// Render a row-major matrix (`values[j][i]`, `j` = y index from bottom) as
/// a heatmap.
pub struct Heatmap<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    /// `values[y][x]`, y increasing upward.
    pub values: &'a [Vec<f64>],
    pub header_comment: &'a str,
}

impl Heatmap<'_> {
    pub fn render(&self) -> String {
        let rows = self.values.len().max(1);
        let cols = self.values.first().map_or(1, |r| r.len()).max(1);
        let cell = 8.0_f64;
        let margin_left = 60.0;
        let margin_bottom = 46.0;
        let margin_top = 34.0;
        let margin_right = 18.0;
        let plot_w = cols as f64 * cell;
        let plot_h = rows as f64 * cell;
        let width = margin_left + plot_w + margin_right;
        let height = margin_top + plot_h + margin_bottom;

        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in self.values {
            for &v in row {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() || !hi.is_finite() {
            lo = 0.0;
            hi = 1.0;
        }
        let span = if hi > lo { hi - lo } else { 1.0 };

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">"
        );
        let _ = writeln!(svg, "<!--\n{}-->", self.header_comment);
        let _ = writeln!(
            svg,
            "<rect width=\"{width:.0}\" height=\"{height:.0}\" fill=\"white\"/>"
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"20\" font-family=\"monospace\" font-size=\"13\">{} (min {:.4e}, max {:.4e})</text>",
            margin_left,
            xml_escape(self.title),
            lo,
            hi
        );
        for (j, row) in self.values.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                let (r, g, b) = colormap((v - lo) / span);
                let x = margin_left + i as f64 * cell;
                let y = margin_top + (rows - 1 - j) as f64 * cell;
                let _ = writeln!(
                    svg,
                    "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{cell:.1}\" height=\"{cell:.1}\" fill=\"#{r:02x}{g:02x}{b:02x}\"/>"
                );
            }
        }
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            margin_left + plot_w / 2.0,
            height - 12.0,
            xml_escape(self.x_label)
        );
        let _ = writeln!(
            svg,
            "<text x=\"16\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>",
            margin_top + plot_h / 2.0,
            margin_top + plot_h / 2.0,
            xml_escape(self.y_label)
        );
        svg.push_str("</svg>\n");
        svg
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering_is_deterministic() {
        let values = vec![vec![0.0, 0.5], vec![1.0, 0.25]];
        let map = Heatmap {
            title: "u(x, mu)",
            x_label: "x",
            y_label: "mu",
            values: &values,
            header_comment: "# config_hash: abc\n",
        };
        let a = map.render();
        let b = map.render();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.contains("#440154") || a.contains("#fde725"));
    }
}
