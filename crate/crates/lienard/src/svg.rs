//! Minimal log-log plots.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 480.0;
const PAD: f64 = 60.0;

pub struct Series<'a> {
    pub label: &'a str,
    pub points: &'a [(f64, f64)],
}

/// Straight line `log10 y = slope * log10 x + intercept`.
pub struct Fit {
    pub label: String,
    pub slope: f64,
    pub intercept: f64,
    pub x_range: (f64, f64),
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn loglog(title: &str, x_label: &str, y_label: &str, series: &[Series], fit: Option<&Fit>, metadata: &str) -> String {
    let logs = |pts: &[(f64, f64)]| -> Vec<(f64, f64)> {
        pts.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.log10(), y.log10())).collect()
    };
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| logs(s.points)).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if all.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, "<metadata>{}</metadata>", escape(metadata));
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    for k in (x0.ceil() as i64)..=(x1.floor() as i64) {
        let x = sx(k as f64);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle" font-size="11">1e{k}</text>"#, H - PAD + 16.0);
    }
    for k in (y0.ceil() as i64)..=(y1.floor() as i64) {
        let y = sy(k as f64);
        let _ = writeln!(s, r#"<text x="{}" y="{y:.2}" text-anchor="end" font-size="11">1e{k}</text>"#, PAD - 6.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#, W / 2.0, H - 16.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    let colors = ["#1f77b4", "#2ca02c", "#9467bd"];
    for (i, ser) in series.iter().enumerate() {
        let pts = logs(ser.points);
        let mut d = String::new();
        for (j, (x, y)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{:.2} {:.2}", if j == 0 { "M" } else { " L" }, sx(*x), sy(*y));
        }
        let c = colors[i % colors.len()];
        let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="{c}" stroke-width="1.5"><title>{}</title></path>"#, escape(ser.label));
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" fill="{c}">{}</text>"#, PAD + 10.0, PAD + 16.0 * (i as f64 + 1.0), escape(ser.label));
    }
    if let Some(f) = fit {
        let (a, b) = (f.x_range.0.log10(), f.x_range.1.log10());
        let ya = f.slope * a + f.intercept;
        let yb = f.slope * b + f.intercept;
        let _ = writeln!(
            s,
            r##"<path d="M{:.2} {:.2} L{:.2} {:.2}" stroke="#d62728" stroke-dasharray="6 4" stroke-width="1.5"/>"##,
            sx(a),
            sy(ya),
            sx(b),
            sy(yb)
        );
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{}" font-size="12" fill="#d62728">{}</text>"##,
            PAD + 10.0,
            PAD + 16.0 * (series.len() as f64 + 1.0),
            escape(&f.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_is_deterministic_and_well_formed() {
        let pts: Vec<(f64, f64)> = (1..50).map(|k| (k as f64, (k * k) as f64)).collect();
        let fit = Fit { label: "slope 2".into(), slope: 2.0, intercept: 0.0, x_range: (1.0, 49.0) };
        let a = loglog("t<1>", "x", "y", &[Series { label: "data", points: &pts }], Some(&fit), "{\"k\": 1}");
        let b = loglog("t<1>", "x", "y", &[Series { label: "data", points: &pts }], Some(&fit), "{\"k\": 1}");
        assert_eq!(a, b);
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("t&lt;1&gt;"));
    }
}
