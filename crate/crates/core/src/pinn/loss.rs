//! Physics, boundary and objective losses with their parameter gradients.
//!
//! The network maps normalized time `τ ∈ [0, 1]` to
//! `(x, y, vx, vy, ux, uy)`. Physical time is `t = τ·T`, so every physical
//! time derivative is `(1/T)·d/dτ` of a network output.

use ndarray::Array2;
use std::f64::consts::PI;

use crate::diffnet::mlp::{batch_backward, batch_forward, BatchEval, ParamVector};
use crate::diffnet::TimeJet;
use crate::dynamics::wind_at;
use crate::environment::{barrier_phi_and_grad, Scenario};

use super::{LossWeights, X, Y, VX, VY, UX, UY};

/// Dynamics residuals `(r1, r2, r3, r4)` at one normalized time.
pub fn residuals(out: &[TimeJet], tau: f64, scenario: &Scenario) -> [f64; 4] {
    let inv_t = 1.0 / scenario.horizon;
    let c_d = scenario.dynamics.c_d;
    let (wx, wy) = wind_at(&scenario.dynamics.wind, out[X].value, out[Y].value, tau * scenario.horizon);
    [
        out[X].d_dt * inv_t - out[VX].value,
        out[Y].d_dt * inv_t - out[VY].value,
        out[VX].d_dt * inv_t - (out[UX].value - c_d * out[VX].value + wx),
        out[VY].d_dt * inv_t - (out[UY].value - c_d * out[VY].value + wy),
    ]
}

/// Wind and its spatial partials `(Wx, Wy, ∂Wx/∂y, ∂Wy/∂x)`.
fn wind_with_partials(scenario: &Scenario, x: f64, y: f64, t: f64) -> (f64, f64, f64, f64) {
    let w = &scenario.dynamics.wind;
    let phase = 2.0 * PI * t.rem_euclid(1.0);
    let (sp, cp) = phase.sin_cos();
    let (sy, cy) = (PI * y / w.ly).sin_cos();
    let (sx, cx) = (PI * x / w.lx).sin_cos();
    (
        w.ax * sy * cp,
        w.ay * sx * sp,
        w.ax * (PI / w.ly) * cy * cp,
        w.ay * (PI / w.lx) * cx * sp,
    )
}

/// Uniform trapezoidal grid on `[0, 1]`: nodes and weights.
pub fn trapezoid_grid(nodes: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(nodes >= 2, "quadrature grid needs at least two nodes");
    let h = 1.0 / (nodes - 1) as f64;
    let taus = (0..nodes).map(|k| if k == nodes - 1 { 1.0 } else { k as f64 * h }).collect();
    let weights = (0..nodes)
        .map(|k| if k == 0 || k == nodes - 1 { 0.5 * h } else { h })
        .collect();
    (taus, weights)
}

/// Loss values of one evaluation. `total` is the curriculum-weighted sum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossBreakdown {
    pub phys: f64,
    pub bc: f64,
    pub obj: f64,
    /// Weighted addends `(λ_phys·m_phys·L_phys, λ_bc·L_bc, λ_obj·m_obj·L_obj)`.
    pub weighted: [f64; 3],
    pub total: f64,
}

impl LossBreakdown {
    pub fn is_finite(&self) -> bool {
        self.phys.is_finite() && self.bc.is_finite() && self.obj.is_finite() && self.total.is_finite()
    }
}

/// Multipliers a curriculum applies to `λ_phys` and `λ_obj` at one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multipliers {
    pub phys: f64,
    pub obj: f64,
}

impl Multipliers {
    pub const ONE: Multipliers = Multipliers { phys: 1.0, obj: 1.0 };
}

/// The composite training objective for one scenario.
pub struct LossProblem<'a> {
    pub scenario: &'a Scenario,
    pub weights: LossWeights,
    quad_taus: Vec<f64>,
    quad_weights: Vec<f64>,
}

impl<'a> LossProblem<'a> {
    pub fn new(scenario: &'a Scenario, weights: LossWeights, quadrature_nodes: usize) -> Self {
        let (quad_taus, quad_weights) = trapezoid_grid(quadrature_nodes);
        Self { scenario, weights, quad_taus, quad_weights }
    }

    /// Evaluates every loss term on one forward pass over
    /// `[collocation | quadrature grid | 0 | 1]`, optionally with the
    /// gradient of the weighted total.
    pub fn evaluate(
        &self,
        params: &ParamVector,
        collocation: &[f64],
        mult: Multipliers,
        with_grad: bool,
    ) -> (LossBreakdown, Option<Vec<f64>>) {
        let nc = collocation.len();
        let nq = self.quad_taus.len();
        let mut taus = Vec::with_capacity(nc + nq + 2);
        taus.extend_from_slice(collocation);
        taus.extend_from_slice(&self.quad_taus);
        taus.push(0.0);
        taus.push(1.0);
        let eval = batch_forward(params, &taus);

        let w = &self.weights;
        let lam_phys = w.lambda_phys * mult.phys;
        let lam_bc = w.lambda_bc;
        let lam_obj = w.lambda_obj * mult.obj;

        let mut gy = Array2::<f64>::zeros(eval.y.raw_dim());
        let mut gdy = Array2::<f64>::zeros(eval.y.raw_dim());

        let phys = self.physics_term(&eval, collocation, lam_phys, &mut gy, &mut gdy);
        let obj = self.objective_term(&eval, nc, lam_obj, &mut gy, &mut gdy);
        let bc = self.boundary_term(&eval, nc + nq, lam_bc, &mut gy);

        let weighted = [lam_phys * phys, lam_bc * bc, lam_obj * obj];
        let breakdown = LossBreakdown { phys, bc, obj, weighted, total: weighted.iter().sum() };
        let grad = with_grad.then(|| batch_backward(params, &eval, &gy, &gdy));
        (breakdown, grad)
    }

    /// Mean squared residual over the collocation rows; accumulates
    /// `scale ×` its cotangents.
    fn physics_term(&self, eval: &BatchEval, taus: &[f64], scale: f64, gy: &mut Array2<f64>, gdy: &mut Array2<f64>) -> f64 {
        let n = taus.len();
        if n == 0 {
            return 0.0;
        }
        let sc = self.scenario;
        let inv_t = 1.0 / sc.horizon;
        let c_d = sc.dynamics.c_d;
        let s = 2.0 * scale / n as f64;
        let mut sum = 0.0;
        for (i, &tau) in taus.iter().enumerate() {
            let y = eval.y.row(i);
            let dy = eval.dy.row(i);
            let (wx, wy, dwx_dy, dwy_dx) = wind_with_partials(sc, y[X], y[Y], tau * sc.horizon);
            let r1 = dy[X] * inv_t - y[VX];
            let r2 = dy[Y] * inv_t - y[VY];
            let r3 = dy[VX] * inv_t - (y[UX] - c_d * y[VX] + wx);
            let r4 = dy[VY] * inv_t - (y[UY] - c_d * y[VY] + wy);
            sum += r1 * r1 + r2 * r2 + r3 * r3 + r4 * r4;

            gdy[[i, X]] += s * r1 * inv_t;
            gy[[i, VX]] -= s * r1;
            gdy[[i, Y]] += s * r2 * inv_t;
            gy[[i, VY]] -= s * r2;
            gdy[[i, VX]] += s * r3 * inv_t;
            gy[[i, UX]] -= s * r3;
            gy[[i, VX]] += s * r3 * c_d;
            gy[[i, Y]] -= s * r3 * dwx_dy;
            gdy[[i, VY]] += s * r4 * inv_t;
            gy[[i, UY]] -= s * r4;
            gy[[i, VY]] += s * r4 * c_d;
            gy[[i, X]] -= s * r4 * dwy_dx;
        }
        sum / n as f64
    }

    /// `α∫‖u‖² + β∫‖u̇‖² + γ∫Φ` over the trapezoidal grid starting at row
    /// `offset`, where `u̇` is the physical time derivative.
    fn objective_term(&self, eval: &BatchEval, offset: usize, scale: f64, gy: &mut Array2<f64>, gdy: &mut Array2<f64>) -> f64 {
        let sc = self.scenario;
        let inv_t = 1.0 / sc.horizon;
        let LossWeights { alpha, beta, gamma, .. } = self.weights;
        let mut total = 0.0;
        for (k, &wq) in self.quad_weights.iter().enumerate() {
            let i = offset + k;
            let y = eval.y.row(i);
            let dy = eval.dy.row(i);
            let (ux, uy) = (y[UX], y[UY]);
            let (dux, duy) = (dy[UX] * inv_t, dy[UY] * inv_t);
            let (phi, gx, gyy) = barrier_phi_and_grad(&sc.obstacles, &sc.barrier, y[X], y[Y]);
            total += wq * (alpha * (ux * ux + uy * uy) + beta * (dux * dux + duy * duy) + gamma * phi);

            let s = scale * wq;
            gy[[i, UX]] += s * alpha * 2.0 * ux;
            gy[[i, UY]] += s * alpha * 2.0 * uy;
            gdy[[i, UX]] += s * beta * 2.0 * dux * inv_t;
            gdy[[i, UY]] += s * beta * 2.0 * duy * inv_t;
            gy[[i, X]] += s * gamma * gx;
            gy[[i, Y]] += s * gamma * gyy;
        }
        total
    }

    /// Squared state error against the start at `τ = 0` (row `offset`) and
    /// the goal at `τ = 1` (row `offset + 1`).
    fn boundary_term(&self, eval: &BatchEval, offset: usize, scale: f64, gy: &mut Array2<f64>) -> f64 {
        let mut total = 0.0;
        for (row, target) in [(offset, &self.scenario.start), (offset + 1, &self.scenario.goal)] {
            for (k, want) in target.as_array().iter().enumerate() {
                let e = eval.y[[row, k]] - want;
                total += e * e;
                gy[[row, k]] += scale * 2.0 * e;
            }
        }
        total
    }
}
