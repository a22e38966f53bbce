//! CSV and SVG rendering of gain tables.

use std::fmt::Write as _;

use crate::beamforming::Architecture;

pub const CSV_HEADER: &str = "subcarrier_index,frequency_hz,direction_or_na,architecture,gain";

/// One sample of a gain sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainRow {
    pub subcarrier_index: usize,
    pub frequency_hz: f64,
    /// `None` where the sample has no 1-D direction (RIS-side sweeps).
    pub direction: Option<f64>,
    pub architecture: Architecture,
    pub gain: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GainTable {
    pub rows: Vec<GainRow>,
}

impl GainTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let dir = r.direction.map_or_else(|| "NA".to_string(), fmt_sig12);
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.subcarrier_index,
                fmt_sig12(r.frequency_hz),
                dir,
                r.architecture,
                fmt_sig12(r.gain)
            );
        }
        out
    }

    pub fn min_gain(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.gain).reduce(f64::min)
    }

    pub fn max_gain(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.gain).reduce(f64::max)
    }

    /// Rows of one subcarrier, in table order.
    pub fn subcarrier(&self, m: usize) -> impl Iterator<Item = &GainRow> {
        self.rows.iter().filter(move |r| r.subcarrier_index == m)
    }

    /// Gain-vs-direction plot, one polyline per subcarrier. Tables without
    /// directions are plotted against frequency in GHz instead.
    pub fn to_svg(&self, title: &str) -> String {
        let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
        let by_direction = self.rows.iter().any(|r| r.direction.is_some());
        for r in &self.rows {
            let (label, x) = match r.direction {
                Some(u) if by_direction => (
                    format!("m={} ({:.2} GHz)", r.subcarrier_index, r.frequency_hz / 1e9),
                    u,
                ),
                _ => (r.architecture.to_string(), r.frequency_hz / 1e9),
            };
            match series.iter_mut().find(|(l, _)| *l == label) {
                Some((_, pts)) => pts.push((x, r.gain)),
                None => series.push((label, vec![(x, r.gain)])),
            }
        }
        let x_label = if by_direction {
            "physical direction"
        } else {
            "frequency (GHz)"
        };
        line_chart(title, x_label, &series)
    }
}

/// Decimal rendering with 12 significant digits, no exponent.
pub fn fmt_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    // exponent after rounding to 12 digits, so a carry (9.99… → 10.0) is seen
    let probe = format!("{:.11e}", x);
    let exp: i32 = probe
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    let decimals = 11 - exp;
    if decimals >= 0 {
        let s = format!("{:.*}", decimals as usize, x);
        if s.starts_with("-0") && s.trim_start_matches(['-', '0', '.']).is_empty() {
            s[1..].to_string()
        } else {
            s
        }
    } else {
        let p = 10f64.powi(-decimals);
        format!("{:.0}", (x / p).round() * p)
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn line_chart(title: &str, x_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let (w, h, pad) = (720.0, 440.0, 60.0);
    let pts = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut y1 = 0.0f64;
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x0 -= 1.0;
        x1 += 1.0;
    }
    let y1 = if y1 > 0.0 { y1 * 1.05 } else { 1.0 };
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - y / y1 * (h - 2.0 * pad);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y1 * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.3}</text>"#,
            sx(fx),
            h - pad + 16.0,
            fx
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#,
            pad - 6.0,
            sy(fy) + 4.0,
            fy
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        w / 2.0,
        h - 18.0,
        escape(x_label)
    );
    for (i, (label, p)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = p
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let ly = pad + 16.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{ly:.1}" fill="{color}">{}</text>"#,
            w - pad - 170.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
