//! The five trajectory metrics and the cross-planner comparison.
//!
//! All integrals use the trapezoidal rule on the record's own time grid.
//! `d_min` is a sampled minimum: the continuous minimum between samples may
//! be lower, which [`refine_min_margin`] narrows for planners whose output
//! can be evaluated at arbitrary times.

use std::fmt;

use crate::environment::{min_signed_distance, Obstacle};
use crate::error::{Error, Result};
use crate::trajectory::{format_sig9, parse_row, TrajectoryRecord};

/// Samples per trajectory used for cross-planner evaluation.
pub const EVAL_SAMPLES: usize = 400;

fn trapezoid(tr: &TrajectoryRecord, f: impl Fn(usize) -> f64) -> f64 {
    let s = tr.samples();
    (1..s.len()).map(|k| 0.5 * (s[k].t - s[k - 1].t) * (f(k) + f(k - 1))).sum()
}

pub fn flight_time(tr: &TrajectoryRecord) -> f64 {
    tr.last().t - tr.first().t
}

/// Time-averaged squared control norm.
pub fn energy_index(tr: &TrajectoryRecord) -> f64 {
    let s = tr.samples();
    trapezoid(tr, |k| s[k].control.norm_sq()) / flight_time(tr)
}

/// Control-rate of every sample: central differences inside, one-sided at
/// the two ends.
pub fn control_rates(tr: &TrajectoryRecord) -> Result<Vec<(f64, f64)>> {
    let s = tr.samples();
    let n = s.len();
    if n < 3 {
        return Err(Error::InvalidTrajectory(format!("control rate needs at least 3 samples, got {n}")));
    }
    Ok((0..n)
        .map(|k| {
            let (a, b) = match k {
                0 => (0, 1),
                _ if k == n - 1 => (n - 2, n - 1),
                _ => (k - 1, k + 1),
            };
            let dt = s[b].t - s[a].t;
            ((s[b].control.ux - s[a].control.ux) / dt, (s[b].control.uy - s[a].control.uy) / dt)
        })
        .collect())
}

/// Time-averaged squared control rate.
pub fn smoothness_index(tr: &TrajectoryRecord) -> Result<f64> {
    let rates = control_rates(tr)?;
    Ok(trapezoid(tr, |k| rates[k].0 * rates[k].0 + rates[k].1 * rates[k].1) / flight_time(tr))
}

/// Polyline length through the sampled positions.
pub fn path_length(tr: &TrajectoryRecord) -> f64 {
    tr.samples()
        .windows(2)
        .map(|w| w[0].state.position_distance(&w[1].state))
        .sum()
}

/// Smallest sampled signed distance to any obstacle; `+inf` without
/// obstacles.
pub fn min_safety_margin(tr: &TrajectoryRecord, obstacles: &[Obstacle]) -> f64 {
    tr.samples()
        .iter()
        .map(|s| min_signed_distance(obstacles, s.state.x, s.state.y))
        .fold(f64::INFINITY, f64::min)
}

/// Re-evaluates the margin on a 10× finer grid around the sampled minimum,
/// using `position_at(t)` to query the continuous trajectory.
pub fn refine_min_margin(tr: &TrajectoryRecord, obstacles: &[Obstacle], position_at: impl Fn(f64) -> (f64, f64)) -> f64 {
    let s = tr.samples();
    let (k_min, coarse) = s
        .iter()
        .enumerate()
        .map(|(k, p)| (k, min_signed_distance(obstacles, p.state.x, p.state.y)))
        .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
    if !coarse.is_finite() {
        return coarse;
    }
    let lo = s[k_min.saturating_sub(1)].t;
    let hi = s[(k_min + 1).min(s.len() - 1)].t;
    let steps = 20;
    (0..=steps)
        .map(|i| {
            let (x, y) = position_at(lo + (hi - lo) * i as f64 / steps as f64);
            min_signed_distance(obstacles, x, y)
        })
        .fold(coarse, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub planner: String,
    pub e_ctrl: f64,
    pub s_ctrl: f64,
    pub l_path: f64,
    pub t_flight: f64,
    pub d_min: f64,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "planner,E_ctrl,S_ctrl,L_path,T_flight,d_min";

    pub fn evaluate(tr: &TrajectoryRecord, obstacles: &[Obstacle]) -> Result<Self> {
        Ok(Self {
            planner: tr.planner().to_string(),
            e_ctrl: energy_index(tr),
            s_ctrl: smoothness_index(tr)?,
            l_path: path_length(tr),
            t_flight: flight_time(tr),
            d_min: min_safety_margin(tr, obstacles),
        })
    }

    pub fn values(&self) -> [f64; 5] {
        [self.e_ctrl, self.s_ctrl, self.l_path, self.t_flight, self.d_min]
    }
}

pub fn metrics_csv(reports: &[MetricsReport]) -> String {
    let mut out = String::from(MetricsReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.planner);
        for v in r.values() {
            out.push(',');
            out.push_str(&format_metric(v));
        }
        out.push('\n');
    }
    out
}

fn format_metric(v: f64) -> String {
    if v == f64::INFINITY {
        "n/a".into()
    } else {
        format_sig9(v)
    }
}

pub fn read_metrics_csv(text: &str) -> Result<Vec<MetricsReport>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == MetricsReport::CSV_HEADER => {}
        other => return Err(Error::Csv(format!("unexpected metrics header {other:?}"))),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (name, rest) = l.split_once(',').ok_or_else(|| Error::Csv(format!("malformed row `{l}`")))?;
            let rest = rest.replace("n/a", "inf");
            let v = parse_row(&rest, 5).map_err(Error::Csv)?;
            Ok(MetricsReport { planner: name.to_string(), e_ctrl: v[0], s_ctrl: v[1], l_path: v[2], t_flight: v[3], d_min: v[4] })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Energy,
    Smoothness,
    PathLength,
    FlightTime,
    SafetyMargin,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::Energy, Metric::Smoothness, Metric::PathLength, Metric::FlightTime, Metric::SafetyMargin];

    pub fn label(self) -> &'static str {
        match self {
            Metric::Energy => "E_ctrl",
            Metric::Smoothness => "S_ctrl",
            Metric::PathLength => "L_path",
            Metric::FlightTime => "T_flight",
            Metric::SafetyMargin => "d_min",
        }
    }

    /// Larger is better only for the safety margin.
    pub fn is_benefit(self) -> bool {
        matches!(self, Metric::SafetyMargin)
    }

    fn of(self, r: &MetricsReport) -> f64 {
        r.values()[self as usize]
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub planners: Vec<String>,
    /// `normalized[m][p]`: metric `m` of planner `p` divided by the largest
    /// magnitude of that metric across planners.
    pub normalized: Vec<Vec<f64>>,
    /// `ranking[m]`: planner indices from best to worst.
    pub ranking: Vec<Vec<usize>>,
}

/// Divide-by-max normalization and per-metric ranking.
///
/// An infinite safety margin (no obstacles) normalizes to 1.
pub fn compare(reports: &[MetricsReport]) -> Result<Comparison> {
    if reports.is_empty() {
        return Err(Error::InvalidArgument("nothing to compare".into()));
    }
    let mut normalized = Vec::with_capacity(5);
    let mut ranking = Vec::with_capacity(5);
    for m in Metric::ALL {
        let vals: Vec<f64> = reports.iter().map(|r| m.of(r)).collect();
        let scale = vals.iter().filter(|v| v.is_finite()).fold(0.0f64, |a, v| a.max(v.abs()));
        normalized.push(
            vals.iter()
                .map(|v| match () {
                    _ if v.is_infinite() => 1.0,
                    _ if scale == 0.0 => 0.0,
                    _ => v / scale,
                })
                .collect::<Vec<_>>(),
        );
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.sort_by(|&a, &b| {
            let ord = vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal);
            if m.is_benefit() {
                ord.reverse()
            } else {
                ord
            }
        });
        ranking.push(order);
    }
    Ok(Comparison { planners: reports.iter().map(|r| r.planner.clone()).collect(), normalized, ranking })
}
