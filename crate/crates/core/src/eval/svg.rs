use std::fmt::Write;

use super::cv::CvReport;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 4] = ["#1f4fd1", "#d1261f", "#2a9d3a", "#8a3ac4"];

/// Colour assigned to a feature set: blue for hand, red for learned.
fn colour(name: &str, index: usize) -> &'static str {
    match name {
        "hand" => PALETTE[0],
        "learned" => PALETTE[1],
        _ => PALETTE[(index + 2) % PALETTE.len()],
    }
}

/// Standalone SVG overlaying every fold's ROC curve, one colour per
/// feature set, with a legend carrying the mean TPR at 1% FPR.
pub fn roc_svg(reports: &[CvReport]) -> String {
    let plot = SIZE - 2.0 * MARGIN;
    let x = |f: f64| MARGIN + f * plot;
    let y = |t: f64| SIZE - MARGIN - t * plot;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{plot}" height="{plot}" fill="none" stroke="#444"/>"##
    );
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let _ = writeln!(
            s,
            r##"<text x="{:.1}" y="{:.1}" text-anchor="middle">{v:.1}</text><text x="{:.1}" y="{:.1}" text-anchor="end">{v:.1}</text>"##,
            x(v),
            SIZE - MARGIN + 16.0,
            MARGIN - 6.0,
            y(v) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#bbb" stroke-dasharray="4 4"/>"##,
        x(0.0),
        y(0.0),
        x(1.0),
        y(1.0)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">False positive rate</text>"#,
        SIZE / 2.0,
        SIZE - 14.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">True positive rate</text>"#,
        SIZE / 2.0,
        SIZE / 2.0
    );
    for (ri, rep) in reports.iter().enumerate() {
        let c = colour(&rep.feature_set, ri);
        let _ = writeln!(s, r#"<g stroke="{c}" fill="none" stroke-width="1" stroke-opacity="0.5">"#);
        for e in &rep.entries {
            let pts: Vec<String> = e
                .curve
                .points
                .iter()
                .map(|p| format!("{:.2},{:.2}", x(p.fpr), y(p.tpr)))
                .collect();
            let _ = writeln!(s, r#"<polyline points="{}"/>"#, pts.join(" "));
        }
        let _ = writeln!(s, "</g>");
        let ly = SIZE - MARGIN - 20.0 - 18.0 * ri as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{c}" stroke-width="3"/><text x="{:.1}" y="{:.1}">{} (TPR@1%FPR {:.3} ± {:.3})</text>"#,
            x(0.35),
            x(0.42),
            x(0.44),
            ly + 4.0,
            rep.feature_set,
            rep.tpr_mean,
            rep.tpr_std
        );
    }
    s.push_str("</svg>\n");
    s
}
