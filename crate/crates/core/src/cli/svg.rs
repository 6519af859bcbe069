use std::fmt::Write as _;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const W: f64 = 720.0;
const H: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Symmetric error bars drawn at each point instead of a line.
    pub err: Option<Vec<f64>>,
}

impl Series {
    pub fn line(name: &str, x: &[f64], y: &[f64]) -> Self {
        Series { name: name.into(), x: x.to_vec(), y: y.to_vec(), err: None }
    }
}

/// Line plot with linear x and linear or log y.
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Dashed horizontal reference line, e.g. the shot-noise level.
    pub reference: Option<(f64, String)>,
    pub log_y: bool,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 7.0).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

impl Plot {
    pub fn render(&self) -> String {
        let ty = |v: f64| if self.log_y { if v > 0.0 { v.log10() } else { f64::NAN } } else { v };
        let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
        let mut ys = (f64::INFINITY, f64::NEG_INFINITY);
        for s in &self.series {
            for (i, (&x, &y)) in s.x.iter().zip(&s.y).enumerate() {
                let e = s.err.as_ref().map_or(0.0, |e| e[i]);
                for v in [ty(y - e), ty(y + e), ty(y)] {
                    if v.is_finite() {
                        ys = (ys.0.min(v), ys.1.max(v));
                    }
                }
                if x.is_finite() {
                    xs = (xs.0.min(x), xs.1.max(x));
                }
            }
        }
        if let Some((r, _)) = &self.reference {
            let v = ty(*r);
            if v.is_finite() {
                ys = (ys.0.min(v), ys.1.max(v));
            }
        }
        if !xs.0.is_finite() {
            xs = (0.0, 1.0);
        }
        if !ys.0.is_finite() {
            ys = (0.0, 1.0);
        }
        if xs.1 <= xs.0 {
            xs.1 = xs.0 + 1.0;
        }
        if ys.1 <= ys.0 {
            let pad = ys.0.abs().max(1.0) * 0.1;
            ys = (ys.0 - pad, ys.1 + pad);
        }
        let pad = 0.05 * (ys.1 - ys.0);
        ys = (ys.0 - pad, ys.1 + pad);
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let px = |x: f64| LEFT + (x - xs.0) / (xs.1 - xs.0) * pw;
        let py = |y: f64| TOP + (ys.1 - y) / (ys.1 - ys.0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, esc(&self.title));
        let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        for t in nice_ticks(xs.0, xs.1) {
            let x = px(t);
            let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#ddd"/>"##, TOP, TOP + ph);
            let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + ph + 16.0, fmt_tick(t));
        }
        for t in nice_ticks(ys.0, ys.1) {
            let y = py(t);
            let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/>"##, LEFT + pw);
            let label = if self.log_y { format!("1e{}", fmt_tick(t)) } else { fmt_tick(t) };
            let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#, LEFT - 6.0, y + 4.0);
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 18.0, esc(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            TOP + ph / 2.0,
            esc(&self.y_label)
        );
        if let Some((r, label)) = &self.reference {
            let v = ty(*r);
            if v.is_finite() {
                let y = py(v);
                let _ = writeln!(
                    s,
                    r#"<line x1="{LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
                    LEFT + pw
                );
                let _ = writeln!(s, r#"<text x="{}" y="{:.2}" fill="gray">{}</text>"#, LEFT + pw + 6.0, y + 4.0, esc(label));
            }
        }
        for (i, ser) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            match &ser.err {
                None => {
                    let mut pts = String::new();
                    for (&x, &y) in ser.x.iter().zip(&ser.y) {
                        let v = ty(y);
                        if v.is_finite() && x.is_finite() {
                            let _ = write!(pts, "{:.2},{:.2} ", px(x), py(v));
                        }
                    }
                    let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.trim_end());
                }
                Some(err) => {
                    for ((&x, &y), &e) in ser.x.iter().zip(&ser.y).zip(err) {
                        let (lo, hi, mid) = (ty(y - e), ty(y + e), ty(y));
                        if !(mid.is_finite() && x.is_finite()) {
                            continue;
                        }
                        let xp = px(x);
                        if lo.is_finite() && hi.is_finite() {
                            let _ = writeln!(s, r#"<line x1="{xp:.2}" y1="{:.2}" x2="{xp:.2}" y2="{:.2}" stroke="{color}"/>"#, py(lo), py(hi));
                        }
                        let _ = writeln!(s, r#"<circle cx="{xp:.2}" cy="{:.2}" r="1.8" fill="{color}"/>"#, py(mid));
                    }
                }
            }
            let ly = TOP + 14.0 + 18.0 * i as f64;
            let lx = LEFT + pw + 10.0;
            let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 18.0);
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 24.0, ly + 4.0, esc(&ser.name));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn fmt_tick(t: f64) -> String {
    if t == 0.0 {
        "0".into()
    } else if t.abs() >= 1e4 || t.abs() < 1e-3 {
        format!("{t:.1e}")
    } else {
        let s = format!("{t:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_polyline_and_reference() {
        let x = [0.0, 1.0, 2.0];
        let p = Plot {
            title: "t & t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series::line("a", &x, &[-1.0, 0.5, 2.0])],
            reference: Some((0.0, "shot noise".into())),
            log_y: false,
        };
        let s = p.render();
        assert!(s.starts_with("<svg "));
        assert!(s.contains("<polyline"));
        assert!(s.contains("stroke-dasharray"));
        assert!(s.contains("t &amp; t"));
        assert!(s.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn log_scale_drops_nonpositive() {
        let x = [0.0, 1.0, 2.0];
        let p = Plot {
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
            series: vec![Series::line("a", &x, &[-1.0, 10.0, 100.0])],
            reference: Some((1.0, "ref".into())),
            log_y: true,
        };
        let s = p.render();
        let pts = s.lines().find(|l| l.contains("<polyline")).unwrap();
        assert_eq!(pts.matches(',').count(), 2);
    }

    #[test]
    fn ticks_cover_range() {
        let t = nice_ticks(-5.0, 5.0);
        assert!(t.contains(&0.0) && t.first().unwrap() >= &-5.0 && t.last().unwrap() <= &5.0);
        assert!(t.len() >= 3);
    }
}
