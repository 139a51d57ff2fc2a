//! Static SVG figures: the normalized metric bar chart and the trajectory
//! plot.

use std::fmt::Write as _;

use crate::dynamics::wind_at;
use crate::environment::Scenario;
use crate::metrics::{Comparison, Metric};
use crate::trajectory::TrajectoryRecord;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Grouped bars, one group per metric and one bar per planner. Each bar
/// carries its normalized value (3 decimals) in `data-value`; its drawn
/// height is that value times `data-unit` pixels.
pub fn comparison_svg(cmp: &Comparison) -> String {
    let (w, h) = (760.0, 420.0);
    let (left, top, plot_h) = (60.0, 40.0, 280.0);
    let base = top + plot_h * 0.8;
    let unit = plot_h * 0.75;
    let group_w = (w - left - 20.0) / Metric::ALL.len() as f64;
    let n = cmp.planners.len().max(1) as f64;
    let bar_w = group_w * 0.7 / n;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-size="16" text-anchor="middle">Normalized metrics (divided by max across planners)</text>"#, w / 2.0);
    let _ = writeln!(s, r#"<line x1="{left}" y1="{base:.3}" x2="{:.3}" y2="{base:.3}" stroke="black"/>"#, w - 20.0);
    for (m, metric) in Metric::ALL.iter().enumerate() {
        let gx = left + m as f64 * group_w;
        let _ = writeln!(s, r#"<g data-metric="{}">"#, metric.label());
        for (p, name) in cmp.planners.iter().enumerate() {
            let v = cmp.normalized[m][p];
            let v3 = (v * 1000.0).round() / 1000.0;
            let bh = (v3 * unit).abs();
            let x = gx + group_w * 0.15 + p as f64 * bar_w;
            let y = if v3 >= 0.0 { base - bh } else { base };
            let _ = writeln!(
                s,
                r#"<rect class="bar" data-planner="{}" data-metric="{}" data-value="{:.3}" data-unit="{unit:.3}" x="{x:.3}" y="{y:.3}" width="{:.3}" height="{bh:.3}" fill="{}"/>"#,
                escape(name),
                metric.label(),
                v3,
                bar_w * 0.9,
                color(p)
            );
        }
        let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}" font-size="13" text-anchor="middle">{}</text>"#, gx + group_w / 2.0, top + plot_h + 10.0, metric.label());
        let _ = writeln!(s, "</g>");
    }
    legend(&mut s, &cmp.planners, left, h - 40.0);
    s.push_str("</svg>\n");
    s
}

fn legend(s: &mut String, names: &[String], x0: f64, y: f64) {
    let _ = writeln!(s, r#"<g class="legend">"#);
    for (i, name) in names.iter().enumerate() {
        let x = x0 + i as f64 * 130.0;
        let _ = writeln!(s, r#"<rect x="{x:.3}" y="{:.3}" width="14" height="14" fill="{}"/>"#, y - 11.0, color(i));
        let _ = writeln!(s, r#"<text x="{:.3}" y="{y:.3}" font-size="13">{}</text>"#, x + 20.0, escape(name));
    }
    let _ = writeln!(s, "</g>");
}

/// Uniform world-to-pixel mapping with the y axis pointing up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldFrame {
    pub scale: f64,
    x_min: f64,
    y_max: f64,
    margin: f64,
}

impl WorldFrame {
    pub fn fit(scenario: &Scenario, width: f64, margin: f64) -> Self {
        let b = &scenario.bounds;
        Self { scale: (width - 2.0 * margin) / b.width(), x_min: b.x_min, y_max: b.y_max, margin }
    }

    pub fn map(&self, x: f64, y: f64) -> (f64, f64) {
        (self.margin + (x - self.x_min) * self.scale, self.margin + (self.y_max - y) * self.scale)
    }
}

/// World bounds, obstacles, start and goal markers, the wind field at time
/// `wind_time`, and one polyline per trajectory with every CSV row as a
/// vertex.
pub fn trajectories_svg(scenario: &Scenario, trajectories: &[TrajectoryRecord], wind_time: f64) -> String {
    let width = 800.0;
    let margin = 30.0;
    let f = WorldFrame::fit(scenario, width, margin);
    let b = &scenario.bounds;
    let height = 2.0 * margin + b.height() * f.scale + 40.0;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height:.3}" viewBox="0 0 {width} {height:.3}">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{width}" height="{height:.3}" fill="white"/>"#);
    let (bx, by) = f.map(b.x_min, b.y_max);
    let _ = writeln!(s, r#"<rect class="bounds" x="{bx:.3}" y="{by:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="black"/>"#, b.width() * f.scale, b.height() * f.scale);

    let _ = writeln!(s, r##"<g class="wind" data-time="{wind_time}" stroke="#999999">"##);
    let max_amp = scenario.dynamics.wind.ax.abs().hypot(scenario.dynamics.wind.ay.abs()).max(1e-12);
    let arrow = 0.4;
    for i in 0..=12 {
        for j in 0..=8 {
            let x = b.x_min + b.width() * (i as f64 + 0.5) / 13.0;
            let y = b.y_min + b.height() * (j as f64 + 0.5) / 9.0;
            let (wx, wy) = wind_at(&scenario.dynamics.wind, x, y, wind_time);
            let (x0, y0) = f.map(x, y);
            let (x1, y1) = f.map(x + arrow * wx / max_amp, y + arrow * wy / max_amp);
            let _ = writeln!(s, r#"<line x1="{x0:.3}" y1="{y0:.3}" x2="{x1:.3}" y2="{y1:.3}"/>"#);
            let _ = writeln!(s, r##"<circle cx="{x1:.3}" cy="{y1:.3}" r="1.5" fill="#999999"/>"##);
        }
    }
    let _ = writeln!(s, "</g>");

    for o in &scenario.obstacles {
        let (cx, cy) = f.map(o.cx, o.cy);
        let _ = writeln!(
            s,
            r##"<circle class="obstacle" data-r="{}" cx="{cx:.3}" cy="{cy:.3}" r="{:.3}" fill="#bbbbbb" stroke="#555555"/>"##,
            o.r,
            o.r * f.scale
        );
    }

    for (i, tr) in trajectories.iter().enumerate() {
        let mut pts = String::new();
        for smp in tr.samples() {
            let (x, y) = f.map(smp.state.x, smp.state.y);
            let _ = write!(pts, "{x:.3},{y:.3} ");
        }
        let _ = writeln!(
            s,
            r#"<polyline class="trajectory" data-planner="{}" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            escape(tr.planner()),
            pts.trim_end(),
            color(i)
        );
    }

    let (sx, sy) = f.map(scenario.start.x, scenario.start.y);
    let (gx, gy) = f.map(scenario.goal.x, scenario.goal.y);
    let _ = writeln!(s, r##"<circle class="start" cx="{sx:.3}" cy="{sy:.3}" r="6" fill="#2ca02c"/>"##);
    let _ = writeln!(s, r##"<rect class="goal" x="{:.3}" y="{:.3}" width="12" height="12" fill="#d62728"/>"##, gx - 6.0, gy - 6.0);

    let _ = writeln!(s, r#"<g class="legend">"#);
    let ly = height - 15.0;
    let _ = writeln!(s, r##"<circle cx="{:.3}" cy="{:.3}" r="6" fill="#2ca02c"/><text x="{:.3}" y="{ly:.3}" font-size="13">start</text>"##, margin + 6.0, ly - 5.0, margin + 16.0);
    let _ = writeln!(s, r##"<rect x="{:.3}" y="{:.3}" width="12" height="12" fill="#d62728"/><text x="{:.3}" y="{ly:.3}" font-size="13">goal</text>"##, margin + 70.0, ly - 11.0, margin + 88.0);
    for (i, tr) in trajectories.iter().enumerate() {
        let x = margin + 150.0 + i as f64 * 120.0;
        let _ = writeln!(s, r#"<line x1="{x:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{}" stroke-width="3"/><text x="{:.3}" y="{ly:.3}" font-size="13">{}</text>"#, ly - 5.0, x + 20.0, ly - 5.0, color(i), x + 25.0, escape(tr.planner()));
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}
