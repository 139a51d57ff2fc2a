//! Uniformly sampled trajectories and their CSV representation.
//!
//! Every planner emits a [`TrajectoryRecord`]; the metrics and plotting code
//! consume nothing else. The CSV header is `t,x,y,vx,vy,ux,uy` and numbers
//! are written with nine significant digits.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::dynamics::{Control, State};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "t,x,y,vx,vy,ux,uy";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: State,
    pub control: Control,
}

impl Sample {
    pub const fn new(t: f64, state: State, control: Control) -> Self {
        Self { t, state, control }
    }

    fn is_finite(&self) -> bool {
        self.t.is_finite() && self.state.is_finite() && self.control.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    planner: String,
    samples: Vec<Sample>,
}

impl TrajectoryRecord {
    /// Builds a record, checking that it has at least two finite samples on a
    /// strictly increasing time grid.
    pub fn new(planner: impl Into<String>, samples: Vec<Sample>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidTrajectory(format!(
                "need at least 2 samples, got {}",
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidTrajectory(format!("sample {i} is not finite")));
        }
        if let Some(i) = samples.windows(2).position(|w| !(w[1].t > w[0].t)) {
            return Err(Error::InvalidTrajectory(format!(
                "time grid is not strictly increasing at sample {}",
                i + 1
            )));
        }
        Ok(Self { planner: planner.into(), samples })
    }

    pub fn planner(&self) -> &str {
        &self.planner
    }

    pub fn with_planner(mut self, planner: impl Into<String>) -> Self {
        self.planner = planner.into();
        self
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        &self.samples[self.samples.len() - 1]
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    /// Shifts every time stamp by `dt`.
    pub fn shifted(&self, dt: f64) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .map(|s| Sample::new(s.t + dt, s.state, s.control))
            .collect();
        Self::new(self.planner.clone(), samples)
    }

    /// Resamples onto `n` uniform times spanning the record.
    ///
    /// States are interpolated linearly; controls are held from the sample at
    /// or before each new time, matching the zero-order-hold convention of
    /// the planners that emit piecewise-constant commands.
    pub fn resample(&self, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("resample needs n >= 2, got {n}")));
        }
        let t0 = self.first().t;
        let t1 = self.last().t;
        let mut out = Vec::with_capacity(n);
        let mut seg = 0;
        for k in 0..n {
            let t = if k == n - 1 { t1 } else { t0 + (t1 - t0) * k as f64 / (n - 1) as f64 };
            while seg + 2 < self.samples.len() && self.samples[seg + 1].t <= t {
                seg += 1;
            }
            let a = &self.samples[seg];
            let b = &self.samples[seg + 1];
            let w = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
            let lerp = |p: f64, q: f64| p + (q - p) * w;
            let state = State::new(
                lerp(a.state.x, b.state.x),
                lerp(a.state.y, b.state.y),
                lerp(a.state.vx, b.state.vx),
                lerp(a.state.vy, b.state.vy),
            );
            let control = if w >= 1.0 { b.control } else { a.control };
            out.push(Sample::new(t, state, control));
        }
        Self::new(self.planner.clone(), out)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut buf = String::with_capacity(self.samples.len() * 96);
        buf.push_str(CSV_HEADER);
        buf.push('\n');
        for s in &self.samples {
            let fields = [
                s.t,
                s.state.x,
                s.state.y,
                s.state.vx,
                s.state.vy,
                s.control.ux,
                s.control.uy,
            ];
            for (i, v) in fields.iter().enumerate() {
                if i > 0 {
                    buf.push(',');
                }
                buf.push_str(&format_sig9(*v));
            }
            buf.push('\n');
        }
        w.write_all(buf.as_bytes())?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = Vec::new();
        self.write_csv(&mut out).expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("csv output is ascii")
    }

    pub fn read_csv<R: BufRead>(planner: impl Into<String>, r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Csv("empty trajectory file".into()))??;
        if header.trim() != CSV_HEADER {
            return Err(Error::Csv(format!(
                "unexpected header `{}`, expected `{CSV_HEADER}`",
                header.trim()
            )));
        }
        let mut samples = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let vals = parse_row(line, 7).map_err(|e| Error::Csv(format!("row {}: {e}", lineno + 2)))?;
            samples.push(Sample::new(
                vals[0],
                State::new(vals[1], vals[2], vals[3], vals[4]),
                Control::new(vals[5], vals[6]),
            ));
        }
        Self::new(planner, samples)
    }
}

pub(crate) fn parse_row(line: &str, expected: usize) -> std::result::Result<Vec<f64>, String> {
    let vals = line
        .split(',')
        .map(|f| f.trim().parse::<f64>().map_err(|e| format!("`{f}`: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if vals.len() != expected {
        return Err(format!("expected {expected} fields, got {}", vals.len()));
    }
    Ok(vals)
}

/// Formats a float with nine significant digits, `%.9g` style.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("valid exponent");
    let mut out = String::new();
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let _ = write!(out, "{v:.decimals$}");
        if out.contains('.') {
            while out.ends_with('0') {
                out.pop();
            }
            if out.ends_with('.') {
                out.pop();
            }
        }
    } else {
        let mut m = mantissa.to_string();
        if m.contains('.') {
            while m.ends_with('0') {
                m.pop();
            }
            if m.ends_with('.') {
                m.pop();
            }
        }
        let _ = write!(out, "{m}e{exp}");
    }
    if out == "-0" {
        out = "0".into();
    }
    out
}
