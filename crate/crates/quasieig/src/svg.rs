//! Standalone SVG line plots (no display server, no plotting crate).
//!
//! Output is a deterministic string: same data in, same bytes out.

/// A single line plot with one or more named series.
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Use log2 spacing on the x axis (R-doubling sweeps read better).
    pub log_x: bool,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
}

const W: f64 = 760.0;
const H: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 140.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

const PALETTE: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"];

impl LinePlot {
    pub fn render(&self) -> String {
        let xs = |x: f64| if self.log_x { x.log2() } else { x };
        let mut x_min = f64::INFINITY;
        let mut x_max = f64::NEG_INFINITY;
        let mut y_min = f64::INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for (_, pts) in &self.series {
            for &(x, y) in pts {
                if !x.is_finite() || !y.is_finite() {
                    continue;
                }
                x_min = x_min.min(xs(x));
                x_max = x_max.max(xs(x));
                y_min = y_min.min(y);
                y_max = y_max.max(y);
            }
        }
        if !x_min.is_finite() {
            x_min = 0.0;
            x_max = 1.0;
            y_min = 0.0;
            y_max = 1.0;
        }
        if x_max - x_min < 1e-300 {
            x_max = x_min + 1.0;
        }
        if y_max - y_min < 1e-300 {
            let pad = y_min.abs().max(1.0) * 0.1;
            y_min -= pad;
            y_max += pad;
        } else {
            let pad = (y_max - y_min) * 0.05;
            y_min -= pad;
            y_max += pad;
        }

        let plot_w = W - MARGIN_L - MARGIN_R;
        let plot_h = H - MARGIN_T - MARGIN_B;
        let px = |x: f64| MARGIN_L + (xs(x) - x_min) / (x_max - x_min) * plot_w;
        let py = |y: f64| H - MARGIN_B - (y - y_min) / (y_max - y_min) * plot_h;

        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
        ));
        out.push_str(&format!(
            "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n<text x=\"{}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\" font-family=\"sans-serif\">{}</text>\n",
            MARGIN_L + plot_w / 2.0,
            escape(&self.title)
        ));
        // axes
        out.push_str(&format!(
            "<line x1=\"{MARGIN_L}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
            H - MARGIN_B,
            W - MARGIN_R,
            H - MARGIN_B
        ));
        out.push_str(&format!(
            "<line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{}\" stroke=\"black\"/>\n",
            H - MARGIN_B
        ));
        // ticks: 5 per axis
        for i in 0..=4 {
            let fx = x_min + (x_max - x_min) * i as f64 / 4.0;
            let label = if self.log_x { format!("{:.3}", 2f64.powf(fx)) } else { format!("{fx:.3}") };
            let x = MARGIN_L + plot_w * i as f64 / 4.0;
            out.push_str(&format!(
                "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\"/>\n<text x=\"{x}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">{label}</text>\n",
                H - MARGIN_B,
                H - MARGIN_B + 5.0,
                H - MARGIN_B + 18.0
            ));
            let fy = y_min + (y_max - y_min) * i as f64 / 4.0;
            let y = H - MARGIN_B - plot_h * i as f64 / 4.0;
            out.push_str(&format!(
                "<line x1=\"{}\" y1=\"{y}\" x2=\"{MARGIN_L}\" y2=\"{y}\" stroke=\"black\"/>\n<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">{fy:.4}</text>\n",
                MARGIN_L - 5.0,
                MARGIN_L - 8.0,
                y + 4.0
            ));
        }
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\">{}</text>\n",
            MARGIN_L + plot_w / 2.0,
            H - 8.0,
            escape(&self.x_label)
        ));
        out.push_str(&format!(
            "<text x=\"16\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\" transform=\"rotate(-90 16 {})\">{}</text>\n",
            MARGIN_T + plot_h / 2.0,
            MARGIN_T + plot_h / 2.0,
            escape(&self.y_label)
        ));

        for (idx, (name, pts)) in self.series.iter().enumerate() {
            let color = PALETTE[idx % PALETTE.len()];
            let path: Vec<String> = pts
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            if path.len() > 1 {
                out.push_str(&format!(
                    "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                    path.join(" ")
                ));
            }
            for p in &path {
                let mut it = p.split(',');
                let (x, y) = (it.next().unwrap(), it.next().unwrap());
                out.push_str(&format!("<circle cx=\"{x}\" cy=\"{y}\" r=\"2.4\" fill=\"{color}\"/>\n"));
            }
            let ly = MARGIN_T + 16.0 * idx as f64;
            out.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n<text x=\"{}\" y=\"{}\" font-size=\"11\" font-family=\"sans-serif\">{}</text>\n",
                W - MARGIN_R + 10.0,
                ly,
                W - MARGIN_R + 24.0,
                ly + 9.0,
                escape(name)
            ));
        }
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
