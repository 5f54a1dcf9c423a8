//! Self-contained SVG line charts: fixed 800x600 viewport, polylines, axis
//! ticks, legend. No external plotting dependency.

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 50.0;
const MARGIN_B: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

fn nice_ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect()
}

fn fmt_tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && (a >= 1e4 || a < 1e-3) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    }
}

/// Render series as a single chart. With `log_log` both axes are log10 and
/// nonpositive points are dropped.
pub fn render_chart(
    series: &[Series],
    title: &str,
    x_label: &str,
    y_label: &str,
    log_log: bool,
) -> String {
    let tx = |v: f64| if log_log { v.log10() } else { v };
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in series {
        for (&x, &y) in s.xs.iter().zip(&s.ys) {
            if log_log && (x <= 0.0 || y <= 0.0) {
                continue;
            }
            xmin = xmin.min(tx(x));
            xmax = xmax.max(tx(x));
            ymin = ymin.min(tx(y));
            ymax = ymax.max(tx(y));
        }
    }
    if !xmin.is_finite() {
        xmin = 0.0;
        xmax = 1.0;
        ymin = 0.0;
        ymax = 1.0;
    }
    if xmax - xmin < 1e-12 {
        xmax = xmin + 1.0;
    }
    if ymax - ymin < 1e-12 {
        ymax = ymin + 1.0;
    }
    let px = |x: f64| MARGIN_L + (x - xmin) / (xmax - xmin) * (WIDTH - MARGIN_L - MARGIN_R);
    let py = |y: f64| HEIGHT - MARGIN_B - (y - ymin) / (ymax - ymin) * (HEIGHT - MARGIN_T - MARGIN_B);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str(&format!(
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"30\" font-family=\"sans-serif\" font-size=\"18\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        xml_escape(title)
    ));
    // axes
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        MARGIN_L,
        HEIGHT - MARGIN_B,
        WIDTH - MARGIN_R,
        HEIGHT - MARGIN_B
    ));
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        MARGIN_L, MARGIN_T, MARGIN_L,
        HEIGHT - MARGIN_B
    ));
    for t in nice_ticks(xmin, xmax, 5) {
        let x = px(t);
        out.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\"/>\n",
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 5.0
        ));
        let lab = if log_log {
            format!("1e{}", fmt_tick(t))
        } else {
            fmt_tick(t)
        };
        out.push_str(&format!(
            "<text x=\"{x}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{lab}</text>\n",
            HEIGHT - MARGIN_B + 18.0
        ));
    }
    for t in nice_ticks(ymin, ymax, 5) {
        let y = py(t);
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"black\"/>\n",
            MARGIN_L - 5.0,
            MARGIN_L
        ));
        let lab = if log_log {
            format!("1e{}", fmt_tick(t))
        } else {
            fmt_tick(t)
        };
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{lab}</text>\n",
            MARGIN_L - 8.0,
            y + 4.0
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 15.0,
        xml_escape(x_label)
    ));
    out.push_str(&format!(
        "<text x=\"20\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">{}</text>\n",
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        xml_escape(y_label)
    ));
    // polylines
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let mut pts = String::new();
        for (&x, &y) in s.xs.iter().zip(&s.ys) {
            if log_log && (x <= 0.0 || y <= 0.0) {
                continue;
            }
            pts.push_str(&format!("{:.2},{:.2} ", px(tx(x)), py(tx(y))));
        }
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            pts.trim_end()
        ));
    }
    // legend
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let y = MARGIN_T + 20.0 * si as f64;
        let x0 = WIDTH - MARGIN_R + 15.0;
        out.push_str(&format!(
            "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            x0 + 25.0
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            x0 + 32.0,
            y + 4.0,
            xml_escape(&s.label)
        ));
    }
    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
