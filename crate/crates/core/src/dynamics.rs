//! Planar point-mass UAV dynamics with linear drag and an oscillating wind
//! field, plus the RK4 reference integrator used by the baselines and tests.

use std::f64::consts::PI;
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::{Sample, TrajectoryRecord};

/// Default integration step in seconds.
pub const DEFAULT_DT: f64 = 0.01;

/// Position and velocity of the vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

impl State {
    pub const fn new(x: f64, y: f64, vx: f64, vy: f64) -> Self {
        Self { x, y, vx, vy }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.vx.is_finite() && self.vy.is_finite()
    }

    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }

    pub fn position_distance(&self, other: &State) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x, self.y, self.vx, self.vy]
    }
}

impl Add for State {
    type Output = State;
    fn add(self, o: State) -> State {
        State::new(self.x + o.x, self.y + o.y, self.vx + o.vx, self.vy + o.vy)
    }
}

impl Mul<f64> for State {
    type Output = State;
    fn mul(self, k: f64) -> State {
        State::new(self.x * k, self.y * k, self.vx * k, self.vy * k)
    }
}

/// Commanded acceleration in the horizontal plane (m/s²).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Control {
    pub ux: f64,
    pub uy: f64,
}

impl Control {
    pub const fn new(ux: f64, uy: f64) -> Self {
        Self { ux, uy }
    }

    pub fn norm_sq(&self) -> f64 {
        self.ux * self.ux + self.uy * self.uy
    }

    /// Clamps each component into `[-u_max, u_max]`.
    pub fn clamped(self, u_max: f64) -> Self {
        Self::new(self.ux.clamp(-u_max, u_max), self.uy.clamp(-u_max, u_max))
    }

    pub fn is_finite(&self) -> bool {
        self.ux.is_finite() && self.uy.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindParams {
    pub ax: f64,
    pub ay: f64,
    pub lx: f64,
    pub ly: f64,
}

impl Default for WindParams {
    fn default() -> Self {
        Self::CALM
    }
}

impl WindParams {
    pub const CALM: WindParams = WindParams { ax: 0.0, ay: 0.0, lx: 10.0, ly: 10.0 };

    pub fn validate(&self) -> Result<()> {
        if !(self.lx > 0.0) || !(self.ly > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "wind length scales must be positive, got lx={} ly={}",
                self.lx, self.ly
            )));
        }
        if !self.ax.is_finite() || !self.ay.is_finite() {
            return Err(Error::InvalidArgument("wind amplitudes must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsParams {
    pub c_d: f64,
    pub wind: WindParams,
}

impl DynamicsParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_d > 0.0) || !self.c_d.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "drag coefficient must be positive, got {}",
                self.c_d
            )));
        }
        self.wind.validate()
    }
}

/// Wind acceleration `(Wx, Wy)` at position `(x, y)` and time `t`.
///
/// The field has period 1 s in time: `Wx` follows `cos(2πt)` and `Wy`
/// follows `sin(2πt)`, each modulated by a sine of the cross coordinate.
pub fn wind_at(p: &WindParams, x: f64, y: f64, t: f64) -> (f64, f64) {
    // Reducing t modulo 1 keeps the two evaluations bit-identical one
    // period apart.
    let phase = 2.0 * PI * t.rem_euclid(1.0);
    let wx = p.ax * (PI * y / p.ly).sin() * phase.cos();
    let wy = p.ay * (PI * x / p.lx).sin() * phase.sin();
    (wx, wy)
}

/// Right-hand side of the equations of motion, returned as a `State`
/// holding `(ẋ, ẏ, v̇x, v̇y)`.
pub fn state_derivative(s: &State, u: &Control, t: f64, p: &DynamicsParams) -> State {
    let (wx, wy) = wind_at(&p.wind, s.x, s.y, t);
    State::new(
        s.vx,
        s.vy,
        u.ux - p.c_d * s.vx + wx,
        u.uy - p.c_d * s.vy + wy,
    )
}

/// One classical Runge–Kutta step with `u` held over `[t, t + dt]`.
pub fn rk4_step(s: &State, u: &Control, t: f64, dt: f64, p: &DynamicsParams) -> Result<State> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {dt}")));
    }
    Ok(rk4_step_unchecked(s, u, t, dt, p))
}

pub(crate) fn rk4_step_unchecked(s: &State, u: &Control, t: f64, dt: f64, p: &DynamicsParams) -> State {
    let half = 0.5 * dt;
    let k1 = state_derivative(s, u, t, p);
    let k2 = state_derivative(&(*s + k1 * half), u, t + half, p);
    let k3 = state_derivative(&(*s + k2 * half), u, t + half, p);
    let k4 = state_derivative(&(*s + k3 * dt), u, t + dt, p);
    *s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Integrates a zero-order-hold control schedule, one control per step of
/// length `dt`, starting at time `t0`.
///
/// The returned record has `controls.len() + 1` samples; sample `k` carries
/// the control applied over `[t_k, t_{k+1})` and the final sample repeats the
/// last control.
pub fn simulate(
    s0: State,
    controls: &[Control],
    p: &DynamicsParams,
    dt: f64,
    t0: f64,
) -> Result<TrajectoryRecord> {
    let states = integrate(s0, controls, p, dt, t0)?;
    let samples = states
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let u = controls[k.min(controls.len() - 1)];
            Sample::new(t0 + k as f64 * dt, *s, u)
        })
        .collect();
    TrajectoryRecord::new("simulate", samples)
}

/// Like [`simulate`] but returns only the state sequence (length
/// `controls.len() + 1`).
pub fn integrate(
    s0: State,
    controls: &[Control],
    p: &DynamicsParams,
    dt: f64,
    t0: f64,
) -> Result<Vec<State>> {
    if controls.is_empty() {
        return Err(Error::InvalidArgument("control schedule is empty".into()));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {dt}")));
    }
    if !s0.is_finite() {
        return Err(Error::NonFiniteState { t: t0 });
    }
    let mut out = Vec::with_capacity(controls.len() + 1);
    out.push(s0);
    let mut s = s0;
    for (k, u) in controls.iter().enumerate() {
        let t = t0 + k as f64 * dt;
        s = rk4_step_unchecked(&s, u, t, dt, p);
        if !s.is_finite() {
            return Err(Error::NonFiniteState { t: t + dt });
        }
        out.push(s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn calm(c_d: f64) -> DynamicsParams {
        DynamicsParams { c_d, wind: WindParams::CALM }
    }

    fn unit_wind(a: f64) -> WindParams {
        WindParams { ax: a, ay: a, lx: 10.0, ly: 10.0 }
    }

    #[test]
    fn wind_examples() {
        let (wx, wy) = wind_at(&unit_wind(1.0), 3.0, 5.0, 0.0);
        assert_eq!(wx, 1.0);
        assert_eq!(wy, 0.0);

        let (wx, _) = wind_at(&unit_wind(3.7), 2.2, 0.0, 0.31);
        assert_eq!(wx, 0.0);

        let (wx, wy) = wind_at(&unit_wind(2.0), 5.0, 5.0, 0.125);
        let expect = 2f64.sqrt();
        assert!((wx - expect).abs() < 1e-12);
        assert!((wy - expect).abs() < 1e-12);
    }

    #[test]
    fn derivative_examples() {
        let d = state_derivative(&State::default(), &Control::default(), 0.0, &calm(0.3));
        assert_eq!(d, State::default());

        let d = state_derivative(&State::new(0.0, 0.0, 1.0, 0.0), &Control::default(), 0.0, &calm(0.3));
        assert_eq!(d, State::new(1.0, 0.0, -0.3, 0.0));

        let p = DynamicsParams { c_d: 0.3, wind: unit_wind(1.0) };
        let d = state_derivative(&State::new(3.0, 5.0, 0.0, 0.0), &Control::default(), 0.0, &p);
        assert_eq!(d, State::new(0.0, 0.0, 1.0, 0.0));
    }

    #[test]
    fn rk4_straight_line() {
        let p = DynamicsParams { c_d: 0.0, wind: WindParams::CALM };
        let s = rk4_step(&State::new(0.0, 0.0, 1.0, 2.0), &Control::default(), 0.0, 0.5, &p).unwrap();
        assert!((s.x - 0.5).abs() < 1e-12 && (s.y - 1.0).abs() < 1e-12);
        assert!((s.vx - 1.0).abs() < 1e-12 && (s.vy - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rk4_rejects_nonpositive_dt() {
        let p = calm(0.3);
        assert!(rk4_step(&State::default(), &Control::default(), 0.0, 0.0, &p).is_err());
        assert!(rk4_step(&State::default(), &Control::default(), 0.0, -0.1, &p).is_err());
    }

    #[test]
    fn drag_decay_matches_closed_form() {
        let p = calm(0.3);
        let controls = vec![Control::default(); 100];
        let states = integrate(State::new(0.0, 0.0, 1.0, 0.0), &controls, &p, 0.01, 0.0).unwrap();
        let vx = states.last().unwrap().vx;
        let exact = (-0.3f64).exp();
        assert!(((vx - exact) / exact).abs() < 1e-8, "vx={vx}");
    }

    #[test]
    fn constant_acceleration_kinematics() {
        let p = DynamicsParams { c_d: 0.0, wind: WindParams::CALM };
        let controls = vec![Control::new(1.0, 0.0); 200];
        let rec = simulate(State::default(), &controls, &p, 0.01, 0.0).unwrap();
        let last = rec.samples().last().unwrap();
        assert!((last.t - 2.0).abs() < 1e-12);
        assert!((last.state.x - 2.0).abs() < 1e-6);
        assert!((last.state.vx - 2.0).abs() < 1e-6);
    }

    #[test]
    fn hover_cancels_wind() {
        let p = DynamicsParams { c_d: 0.3, wind: unit_wind(1.0) };
        let home = State::new(2.0, 3.0, 0.0, 0.0);
        let max_dev = |dt: f64| {
            let n = (2.0 / dt) as usize;
            let mut s = home;
            let mut dev: f64 = 0.0;
            for k in 0..n {
                let t = k as f64 * dt;
                // hold the cancelling command sampled at the step midpoint
                let (wx, wy) = wind_at(&p.wind, home.x, home.y, t + 0.5 * dt);
                s = rk4_step(&s, &Control::new(-wx, -wy), t, dt, &p).unwrap();
                dev = dev.max(s.position_distance(&home));
            }
            dev
        };
        for dt in [1e-2, 1e-3] {
            let dev = max_dev(dt);
            assert!(dev < dt * dt, "dt={dt} dev={dev}");
        }
    }

    #[test]
    fn empty_schedule_rejected() {
        assert!(simulate(State::default(), &[], &calm(0.3), 0.01, 0.0).is_err());
    }

    #[test]
    fn divergent_control_is_an_error() {
        let controls = vec![Control::new(f64::MAX, 0.0); 10];
        let err = simulate(State::default(), &controls, &calm(0.3), 0.01, 0.0).unwrap_err();
        assert!(matches!(err, Error::NonFiniteState { .. }));
    }

    #[test]
    fn first_sample_is_initial_state() {
        let s0 = State::new(1.0, 2.0, 3.0, 4.0);
        let p = DynamicsParams { c_d: 0.3, wind: unit_wind(0.5) };
        let rec = simulate(s0, &[Control::new(0.1, 0.2); 5], &p, 0.01, 0.0).unwrap();
        assert_eq!(rec.samples()[0].state, s0);
        assert_eq!(rec.len(), 6);
    }
}
