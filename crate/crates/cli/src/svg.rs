//! Minimal hand-rolled SVG plots: a polyline cross-section and a verdict
//! margin bar chart. Deterministic text output, no external dependencies.

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 52.0;

fn header(title: &str) -> String {
    format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="24" font-family="monospace" font-size="14" text-anchor="middle">{}</text>
"#,
        WIDTH / 2.0,
        xml_escape(title)
    )
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Polyline plot of (x, value) samples; gaps (NaN values) split the line.
pub fn cross_section_svg(title: &str, samples: &[[f64; 2]]) -> String {
    let mut out = header(title);
    let xs: Vec<f64> = samples.iter().map(|s| s[0]).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s[1]).filter(|v| v.is_finite()).collect();
    if xs.is_empty() || ys.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let (x0, x1) = (
        xs.iter().cloned().fold(f64::INFINITY, f64::min),
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let (y0, y1) = (
        ys.iter().cloned().fold(f64::INFINITY, f64::min).min(0.0),
        ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let xr = (x1 - x0).max(1e-12);
    let yr = (y1 - y0).max(1e-12);
    let to_px = |x: f64, y: f64| {
        (
            MARGIN + (x - x0) / xr * (WIDTH - 2.0 * MARGIN),
            HEIGHT - MARGIN - (y - y0) / yr * (HEIGHT - 2.0 * MARGIN),
        )
    };

    // Axes with min/max labels.
    let (ax0, ay0) = to_px(x0, y0);
    let (ax1, _) = to_px(x1, y0);
    let (_, ay1) = to_px(x0, y1);
    out.push_str(&format!(
        "<line x1=\"{ax0}\" y1=\"{ay0}\" x2=\"{ax1}\" y2=\"{ay0}\" stroke=\"black\"/>\n<line x1=\"{ax0}\" y1=\"{ay0}\" x2=\"{ax0}\" y2=\"{ay1}\" stroke=\"black\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{ax0}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\">{x0:.3}</text>\n",
        ay0 + 16.0
    ));
    out.push_str(&format!(
        "<text x=\"{ax1}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{x1:.3}</text>\n",
        ay0 + 16.0
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{ay1}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{y1:.4}</text>\n",
        ax0 - 4.0
    ));

    let mut segments: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
    for s in samples {
        if s[1].is_finite() {
            segments.last_mut().unwrap().push(to_px(s[0], s[1]));
        } else if !segments.last().unwrap().is_empty() {
            segments.push(Vec::new());
        }
    }
    for seg in segments.iter().filter(|s| s.len() > 1) {
        let points: Vec<String> = seg.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n",
            points.join(" ")
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Bar chart of verdict margins; satisfied bars in green, violations in red.
/// Bar heights are scaled by the largest |margin|.
pub fn margins_svg(title: &str, labels: &[String], margins: &[(f64, bool)]) -> String {
    let mut out = header(title);
    if margins.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let max_abs = margins
        .iter()
        .map(|(m, _)| m.abs())
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let n = margins.len() as f64;
    let band = (WIDTH - 2.0 * MARGIN) / n;
    let zero_y = HEIGHT / 2.0;
    out.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{zero_y}\" x2=\"{}\" y2=\"{zero_y}\" stroke=\"black\"/>\n",
        WIDTH - MARGIN
    ));
    for (i, ((margin, satisfied), label)) in margins.iter().zip(labels).enumerate() {
        let h = margin / max_abs * (HEIGHT / 2.0 - MARGIN);
        let x = MARGIN + i as f64 * band + 0.15 * band;
        let (y, bar_h) = if h >= 0.0 { (zero_y - h, h) } else { (zero_y, -h) };
        let color = if *satisfied { "seagreen" } else { "crimson" };
        out.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{bar_h:.2}\" fill=\"{color}\"/>\n",
            0.7 * band
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"9\" transform=\"rotate(60 {:.2} {:.2})\">{}</text>\n",
            x,
            HEIGHT - MARGIN + 10.0,
            x,
            HEIGHT - MARGIN + 10.0,
            xml_escape(label)
        ));
    }
    out.push_str("</svg>\n");
    out
}
