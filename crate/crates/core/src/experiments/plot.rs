//! Minimal SVG 1.1 rendering for step CDFs and interval panels.

use std::fmt::Write as _;

use crate::ecdf::WeightedEcdf;
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = ["black", "red", "green", "blue", "orange", "purple"];

/// Glyph drawn where a lower bound is undefined.
pub const UNDEFINED_LOWER_GLYPH: &str = "\u{25BD}";
/// Glyph drawn where an upper bound is undefined.
pub const UNDEFINED_UPPER_GLYPH: &str = "\u{25B3}";
/// Glyph marking the reference value.
pub const REFERENCE_GLYPH: &str = "\u{00D7}";

pub struct Series<'a> {
    pub label: String,
    pub ecdf: &'a WeightedEcdf,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, width: f64, height: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">
<rect width="100%" height="100%" fill="white"/>
<text x="{x}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{t}</text>"#,
        x = width / 2.0,
        t = escape(title)
    );
}

/// Overlaid step plots; the x range spans the 1% to 99% quantiles of all series.
pub fn ecdf_svg(title: &str, series: &[Series<'_>]) -> Result<String> {
    if series.is_empty() {
        return Err(Error::input("nothing to plot"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in series {
        lo = lo.min(s.ecdf.quantile(0.01)?);
        hi = hi.max(s.ecdf.quantile(0.99)?);
    }
    if !(hi > lo) {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let sx = |t: f64| MARGIN + (t.clamp(lo, hi) - lo) / (hi - lo) * (WIDTH - 2.0 * MARGIN);
    let sy = |g: f64| HEIGHT - MARGIN - g * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    header(&mut out, WIDTH, HEIGHT, title);
    axes(&mut out, lo, hi, 0.0, 1.0);
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut d = format!("M{:.2},{:.2}", sx(lo), sy(0.0));
        let mut prev = 0.0;
        for &(t, g) in s.ecdf.points() {
            let _ = write!(d, " H{:.2} V{:.2}", sx(t), sy(g));
            prev = g;
        }
        let _ = write!(d, " H{:.2}", sx(hi));
        debug_assert_eq!(prev, 1.0);
        let _ = writeln!(
            out,
            r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.2"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            MARGIN + 10.0,
            MARGIN + 14.0 * (k as f64 + 1.0),
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn axes(out: &mut String, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) {
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        out,
        r#"<path d="M{l},{t} V{b} H{r}" fill="none" stroke="gray"/>
<text x="{l}" y="{y}" font-family="sans-serif" font-size="10">{x_lo:.3}</text>
<text x="{r}" y="{y}" text-anchor="end" font-family="sans-serif" font-size="10">{x_hi:.3}</text>
<text x="{xl}" y="{b}" text-anchor="end" font-family="sans-serif" font-size="10">{y_lo:.3}</text>
<text x="{xl}" y="{t}" text-anchor="end" font-family="sans-serif" font-size="10">{y_hi:.3}</text>"#,
        y = b + 15.0,
        xl = l - 4.0
    );
}

/// One vertical interval in a panel.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMark {
    pub label: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalPanel {
    pub title: String,
    pub reference: Option<f64>,
    pub marks: Vec<IntervalMark>,
}

/// Side-by-side panels of vertical intervals. An undefined bound runs to the
/// panel edge and carries a triangle glyph; the reference is a cross.
pub fn intervals_svg(title: &str, panels: &[IntervalPanel]) -> String {
    let panel_w = 260.0;
    let width = MARGIN + panel_w * panels.len().max(1) as f64 + MARGIN;
    let mut out = String::new();
    header(&mut out, width, HEIGHT, title);
    for (k, panel) in panels.iter().enumerate() {
        let x0 = MARGIN + panel_w * k as f64;
        let values: Vec<f64> = panel
            .marks
            .iter()
            .flat_map(|m| [m.lower, m.upper])
            .chain([panel.reference])
            .flatten()
            .filter(|v| v.is_finite())
            .collect();
        let mut lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(hi > lo) {
            let c = if lo.is_finite() { lo } else { 0.0 };
            lo = c - 1.0;
            hi = c + 1.0;
        }
        let pad = 0.1 * (hi - lo);
        let (lo, hi) = (lo - pad, hi + pad);
        let top = MARGIN;
        let bottom = HEIGHT - MARGIN;
        let sy = |v: f64| bottom - (v - lo) / (hi - lo) * (bottom - top);
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{top}" width="{:.2}" height="{:.2}" fill="none" stroke="gray"/>
<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>
<text x="{:.2}" y="{bottom}" font-family="sans-serif" font-size="10">{lo:.4}</text>
<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10">{hi:.4}</text>"#,
            x0 + 10.0,
            panel_w - 20.0,
            bottom - top,
            x0 + panel_w / 2.0,
            top - 8.0,
            escape(&panel.title),
            x0 + 12.0,
            x0 + 12.0,
            top + 10.0,
        );
        let n = panel.marks.len().max(1) as f64;
        for (j, m) in panel.marks.iter().enumerate() {
            let x = x0 + 10.0 + (panel_w - 20.0) * (j as f64 + 0.5) / n;
            let color = COLORS[j % COLORS.len()];
            let y_lo = m.lower.map_or(bottom, sy);
            let y_hi = m.upper.map_or(top, sy);
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{y_lo:.2}" x2="{x:.2}" y2="{y_hi:.2}" stroke="{color}" stroke-width="2"/>"#
            );
            for (v, y) in [(m.lower, y_lo), (m.upper, y_hi)] {
                if v.is_some() {
                    let _ = writeln!(
                        out,
                        r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/>"#,
                        x - 6.0,
                        x + 6.0
                    );
                }
            }
            if m.lower.is_none() {
                glyph(&mut out, x, bottom - 4.0, UNDEFINED_LOWER_GLYPH, color);
            }
            if m.upper.is_none() {
                glyph(&mut out, x, top + 14.0, UNDEFINED_UPPER_GLYPH, color);
            }
            if let Some(r) = panel.reference {
                glyph(&mut out, x + 14.0, sy(r) + 5.0, REFERENCE_GLYPH, "black");
            }
            let _ = writeln!(
                out,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
                bottom + 16.0,
                escape(&m.label)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn glyph(out: &mut String, x: f64, y: f64, g: &str, color: &str) {
    let _ = writeln!(
        out,
        r#"<text x="{x:.2}" y="{y:.2}" text-anchor="middle" font-family="sans-serif" font-size="16" fill="{color}">{g}</text>"#
    );
}
