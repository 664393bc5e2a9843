//! Report serialization: trajectory text, CSV curves, SVG plots, and
//! per-frame overlay images.

use image::RgbImage;
use ladcf::bench::{EvalReport, PRECISION_POINTS, SUCCESS_POINTS};
use ladcf::BoundingBox;

/// One line per frame, `%.2f,%.2f,%.2f,%.2f`, frame coordinates.
pub fn trajectory_text(boxes: &[BoundingBox]) -> String {
    let mut out = String::new();
    for b in boxes {
        out.push_str(&format!("{:.2},{:.2},{:.2},{:.2}\n", b.x, b.y, b.w, b.h));
    }
    out
}

fn csv_name(name: &str) -> String {
    name.replace([',', '\n', '\r'], "_")
}

/// Precision curves: distance threshold, dataset mean, then one column per
/// sequence (name-sorted, matching the report).
pub fn precision_csv(report: &EvalReport) -> String {
    let mut out = String::from("pixels,mean");
    for seq in &report.sequences {
        out.push(',');
        out.push_str(&csv_name(&seq.name));
    }
    out.push('\n');
    for d in 0..PRECISION_POINTS {
        out.push_str(&format!("{d},{}", report.mean_precision[d]));
        for seq in &report.sequences {
            out.push_str(&format!(",{}", seq.precision[d]));
        }
        out.push('\n');
    }
    out
}

/// Success curves over the 101-point IoU grid, same column layout.
pub fn success_csv(report: &EvalReport) -> String {
    let mut out = String::from("iou,mean");
    for seq in &report.sequences {
        out.push(',');
        out.push_str(&csv_name(&seq.name));
    }
    out.push('\n');
    for i in 0..SUCCESS_POINTS {
        out.push_str(&format!("{},{}", i as f64 / 100.0, report.mean_success[i]));
        for seq in &report.sequences {
            out.push_str(&format!(",{}", seq.success[i]));
        }
        out.push('\n');
    }
    out
}

const PALETTE: [&str; 8] = [
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// Self-contained SVG line plot: unit-interval y axis, `x_max`-spanning x
/// axis, one polyline per series with a legend. The first series is drawn
/// boldest (callers put the dataset mean there).
pub fn curve_svg(title: &str, x_label: &str, y_label: &str, x_max: f64, series: &[(String, Vec<f64>)]) -> String {
    let (width, height) = (640.0, 480.0);
    let (left, right, top, bottom) = (70.0, 620.0, 50.0, 420.0);
    let (plot_w, plot_h) = (right - left, bottom - top);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width} {height}\" \
         font-family=\"sans-serif\" font-size=\"14\">\n\
         <rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n\
         <text x=\"{tx}\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">{title}</text>\n",
        tx = (left + right) / 2.0,
    );

    // Axes with 6 ticks each.
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{bottom}\" x2=\"{right}\" y2=\"{bottom}\" stroke=\"black\"/>\n\
         <line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{bottom}\" stroke=\"black\"/>\n"
    ));
    for k in 0..=5 {
        let frac = k as f64 / 5.0;
        let x = left + frac * plot_w;
        let y = bottom - frac * plot_h;
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{bottom}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{x}\" y=\"{}\" text-anchor=\"middle\">{:.2}</text>\n",
            bottom + 6.0,
            bottom + 24.0,
            frac * x_max,
        ));
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{left}\" y2=\"{y}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.1}</text>\n",
            left - 6.0,
            left - 10.0,
            y + 5.0,
            frac,
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{tx}\" y=\"{ty}\" text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"22\" y=\"{my}\" text-anchor=\"middle\" transform=\"rotate(-90 22 {my})\">{y_label}</text>\n",
        tx = (left + right) / 2.0,
        ty = height - 16.0,
        my = (top + bottom) / 2.0,
    ));

    // Curves, then a legend capped at the first ten series.
    for (s, (_, values)) in series.iter().enumerate() {
        if values.len() < 2 {
            continue;
        }
        let color = PALETTE[s % PALETTE.len()];
        let stroke = if s == 0 { 3.0 } else { 1.5 };
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let x = left + plot_w * i as f64 / (values.len() - 1) as f64;
                let y = bottom - plot_h * v.clamp(0.0, 1.0);
                format!("{x:.1},{y:.1}")
            })
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"{stroke}\" points=\"{}\"/>\n",
            points.join(" ")
        ));
    }
    for (s, (label, _)) in series.iter().take(10).enumerate() {
        let color = PALETTE[s % PALETTE.len()];
        let y = top + 14.0 + 20.0 * s as f64;
        let label = label.replace('<', "&lt;").replace('>', "&gt;");
        svg.push_str(&format!(
            "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"3\"/>\n\
             <text x=\"{tx}\" y=\"{ty}\">{label}</text>\n",
            x0 = left + 12.0,
            x1 = left + 44.0,
            tx = left + 50.0,
            ty = y + 5.0,
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Draws a 2-pixel box outline (clamped to the frame) for overlay output.
pub fn draw_box_outline(frame: &mut RgbImage, b: &BoundingBox) {
    const COLOR: image::Rgb<u8> = image::Rgb([255, 48, 48]);
    let (fw, fh) = (frame.width() as i64, frame.height() as i64);
    let x0 = b.x.round() as i64;
    let y0 = b.y.round() as i64;
    let x1 = (b.x + b.w).round() as i64;
    let y1 = (b.y + b.h).round() as i64;
    for y in y0..y1 {
        for x in x0..x1 {
            let on_border = x - x0 < 2 || x1 - x <= 2 || y - y0 < 2 || y1 - y <= 2;
            if on_border && (0..fw).contains(&x) && (0..fh).contains(&y) {
                frame.put_pixel(x as u32, y as u32, COLOR);
            }
        }
    }
}
