//! Wind-aware A* on an 8-connected lattice, followed by cubic-spline
//! smoothing and control recovery through the dynamics.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::dynamics::{wind_at, Control, State};
use crate::environment::Scenario;
use crate::error::{Error, Result};
use crate::spline::NaturalCubicSpline;
use crate::trajectory::{Sample, TrajectoryRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AstarConfig {
    /// Lattice spacing in meters.
    pub cell_size: f64,
    /// Cruise speed used for traversal times and for retiming the spline.
    pub v_ref: f64,
    /// Weight of the squared steady-state control.
    pub alpha: f64,
    /// Weight of the barrier potential at the edge midpoint.
    pub gamma: f64,
    /// Upper bound on waypoint-insertion rounds when the spline cuts into an
    /// obstacle.
    pub max_refinements: usize,
}

impl Default for AstarConfig {
    fn default() -> Self {
        Self { cell_size: 0.25, v_ref: 1.5, alpha: 0.01, gamma: 0.1, max_refinements: 8 }
    }
}

impl AstarConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cell_size > 0.0) || !(self.v_ref > 0.0) {
            return Err(Error::InvalidArgument("cell_size and v_ref must be positive".into()));
        }
        if !(self.alpha >= 0.0) || !(self.gamma >= 0.0) {
            return Err(Error::InvalidArgument("A* weights must be non-negative".into()));
        }
        Ok(())
    }
}

/// Lattice nodes at `(x_min + i·cell, y_min + j·cell)` covering the world
/// bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub cell_size: f64,
    pub x_min: f64,
    pub y_min: f64,
    pub nx: usize,
    pub ny: usize,
}

pub type Cell = (usize, usize);

const NEIGHBORS: [(isize, isize); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];

impl GridSpec {
    pub fn new(scenario: &Scenario, cell_size: f64) -> Result<Self> {
        if !(cell_size > 0.0) {
            return Err(Error::InvalidArgument(format!("cell size must be positive, got {cell_size}")));
        }
        let b = &scenario.bounds;
        let nx = (b.width() / cell_size).round() as usize + 1;
        let ny = (b.height() / cell_size).round() as usize + 1;
        let grid = Self { cell_size, x_min: b.x_min, y_min: b.y_min, nx, ny };
        for (what, s) in [("start", &scenario.start), ("goal", &scenario.goal)] {
            if grid.try_cell_of(s.x, s.y).is_none() {
                return Err(Error::InvalidArgument(format!("{what} is not covered by the grid")));
            }
        }
        Ok(grid)
    }

    pub fn center(&self, c: Cell) -> (f64, f64) {
        (self.x_min + c.0 as f64 * self.cell_size, self.y_min + c.1 as f64 * self.cell_size)
    }

    fn try_cell_of(&self, x: f64, y: f64) -> Option<Cell> {
        let i = ((x - self.x_min) / self.cell_size).round();
        let j = ((y - self.y_min) / self.cell_size).round();
        (i >= 0.0 && j >= 0.0 && (i as usize) < self.nx && (j as usize) < self.ny).then_some((i as usize, j as usize))
    }

    /// Nearest lattice node to `(x, y)`, clamped onto the grid.
    pub fn cell_of(&self, x: f64, y: f64) -> Cell {
        let i = ((x - self.x_min) / self.cell_size).round().clamp(0.0, (self.nx - 1) as f64);
        let j = ((y - self.y_min) / self.cell_size).round().clamp(0.0, (self.ny - 1) as f64);
        (i as usize, j as usize)
    }

    pub fn index(&self, c: Cell) -> usize {
        c.1 * self.nx + c.0
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn neighbors(&self, c: Cell) -> impl Iterator<Item = Cell> + '_ {
        NEIGHBORS.iter().filter_map(move |(di, dj)| {
            let i = c.0 as isize + di;
            let j = c.1 as isize + dj;
            (i >= 0 && j >= 0 && (i as usize) < self.nx && (j as usize) < self.ny).then_some((i as usize, j as usize))
        })
    }

    /// Octile distance between two nodes in meters.
    pub fn octile(&self, a: Cell, b: Cell) -> f64 {
        let dx = a.0.abs_diff(b.0) as f64;
        let dy = a.1.abs_diff(b.1) as f64;
        self.cell_size * (dx.max(dy) + (SQRT_2 - 1.0) * dx.min(dy))
    }
}

/// A node is blocked when its center lies strictly inside an obstacle.
pub fn is_blocked(scenario: &Scenario, grid: &GridSpec, c: Cell) -> bool {
    let (x, y) = grid.center(c);
    scenario.clearance(x, y) < 0.0
}

/// Cost of moving between neighboring nodes when the move starts at time
/// `t_est`: traversal time, plus `α‖u‖²` for the acceleration that holds
/// `v_ref` along the edge against drag and the midpoint wind, plus `γΦ` at
/// the midpoint.
pub fn edge_cost(grid: &GridSpec, from: Cell, to: Cell, t_est: f64, scenario: &Scenario, cfg: &AstarConfig) -> f64 {
    let (x0, y0) = grid.center(from);
    let (x1, y1) = grid.center(to);
    let (dx, dy) = (x1 - x0, y1 - y0);
    let dist = dx.hypot(dy);
    let dt = dist / cfg.v_ref;
    let (mx, my) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let (vx, vy) = (cfg.v_ref * dx / dist, cfg.v_ref * dy / dist);
    let (wx, wy) = wind_at(&scenario.dynamics.wind, mx, my, t_est);
    let u = Control::new(scenario.dynamics.c_d * vx - wx, scenario.dynamics.c_d * vy - wy);
    dt + cfg.alpha * u.norm_sq() + cfg.gamma * scenario.phi(mx, my)
}

/// Admissible lower bound on the remaining cost: octile distance at cruise
/// speed.
pub fn heuristic(grid: &GridSpec, c: Cell, goal: Cell, cfg: &AstarConfig) -> f64 {
    grid.octile(c, goal) / cfg.v_ref
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    pub cells: Vec<Cell>,
    pub waypoints: Vec<(f64, f64)>,
    pub cost: f64,
}

impl GridPath {
    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Open {
    f: f64,
    h: f64,
    node: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on f, then on h, then on node index for determinism
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A* over the lattice. Wind is frozen per expansion at the accumulated
/// traversal time of the node being expanded.
pub fn astar_search(scenario: &Scenario, grid: &GridSpec, cfg: &AstarConfig) -> Result<GridPath> {
    search(scenario, grid, cfg, true)
}

pub(crate) fn search(scenario: &Scenario, grid: &GridSpec, cfg: &AstarConfig, use_heuristic: bool) -> Result<GridPath> {
    cfg.validate()?;
    let start = grid.cell_of(scenario.start.x, scenario.start.y);
    let goal = grid.cell_of(scenario.goal.x, scenario.goal.y);
    if is_blocked(scenario, grid, start) || is_blocked(scenario, grid, goal) {
        return Err(Error::NoPath);
    }
    let n = grid.len();
    let mut g = vec![f64::INFINITY; n];
    let mut elapsed = vec![0.0; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    let h = |c: Cell| if use_heuristic { heuristic(grid, c, goal, cfg) } else { 0.0 };

    let si = grid.index(start);
    g[si] = 0.0;
    heap.push(Open { f: h(start), h: h(start), node: si });
    let cell_at = |idx: usize| (idx % grid.nx, idx / grid.nx);

    while let Some(Open { node, .. }) = heap.pop() {
        if closed[node] {
            continue;
        }
        closed[node] = true;
        let cell = cell_at(node);
        if cell == goal {
            let mut cells = vec![cell];
            let mut cur = node;
            while parent[cur] != usize::MAX {
                cur = parent[cur];
                cells.push(cell_at(cur));
            }
            cells.reverse();
            let waypoints = cells.iter().map(|c| grid.center(*c)).collect();
            return Ok(GridPath { cells, waypoints, cost: g[node] });
        }
        for nb in grid.neighbors(cell) {
            let ni = grid.index(nb);
            if closed[ni] || is_blocked(scenario, grid, nb) {
                continue;
            }
            let cand = g[node] + edge_cost(grid, cell, nb, elapsed[node], scenario, cfg);
            if cand < g[ni] {
                g[ni] = cand;
                parent[ni] = node;
                elapsed[ni] = elapsed[node] + grid.octile(cell, nb) / cfg.v_ref;
                let hv = h(nb);
                heap.push(Open { f: cand + hv, h: hv, node: ni });
            }
        }
    }
    Err(Error::NoPath)
}

/// The smoothed, retimed path: a natural cubic spline in cumulative chord
/// length flown at constant parameter speed `v_ref`.
#[derive(Debug, Clone)]
pub struct SmoothPath {
    sx: NaturalCubicSpline,
    sy: NaturalCubicSpline,
    v_ref: f64,
    duration: f64,
    c_d: f64,
    wind: crate::dynamics::WindParams,
}

impl SmoothPath {
    pub fn through(waypoints: &[(f64, f64)], scenario: &Scenario, v_ref: f64) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::InvalidArgument("smoothing needs at least two waypoints".into()));
        }
        let mut knots = Vec::with_capacity(waypoints.len());
        let mut acc = 0.0;
        knots.push(0.0);
        for w in waypoints.windows(2) {
            acc += (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1);
            knots.push(acc);
        }
        let xs: Vec<f64> = waypoints.iter().map(|w| w.0).collect();
        let ys: Vec<f64> = waypoints.iter().map(|w| w.1).collect();
        Ok(Self {
            sx: NaturalCubicSpline::new(&knots, &xs)?,
            sy: NaturalCubicSpline::new(&knots, &ys)?,
            v_ref,
            duration: acc / v_ref,
            c_d: scenario.dynamics.c_d,
            wind: scenario.dynamics.wind,
        })
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn position(&self, t: f64) -> (f64, f64) {
        let s = t * self.v_ref;
        (self.sx.eval(s).0, self.sy.eval(s).0)
    }

    /// State and the control that realizes it: `u = v̇ + c_d·v − W`.
    pub fn state_and_control(&self, t: f64) -> (State, Control) {
        let s = t * self.v_ref;
        let (x, dx, ddx) = self.sx.eval(s);
        let (y, dy, ddy) = self.sy.eval(s);
        let v = self.v_ref;
        let (vx, vy) = (dx * v, dy * v);
        let (ax, ay) = (ddx * v * v, ddy * v * v);
        let (wx, wy) = wind_at(&self.wind, x, y, t);
        (State::new(x, y, vx, vy), Control::new(ax + self.c_d * vx - wx, ay + self.c_d * vy - wy))
    }

    pub fn sample(&self, n: usize) -> Result<TrajectoryRecord> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 samples, got {n}")));
        }
        let samples = (0..n)
            .map(|k| {
                let t = if k == n - 1 { self.duration } else { self.duration * k as f64 / (n - 1) as f64 };
                let (s, u) = self.state_and_control(t);
                Sample::new(t, s, u)
            })
            .collect();
        TrajectoryRecord::new("astar", samples)
    }

    /// Smallest clearance along the spline, checked every ~1 cm of chord.
    pub fn min_clearance(&self, scenario: &Scenario) -> (f64, f64) {
        let steps = ((self.duration * self.v_ref) / 0.01).ceil().max(2.0) as usize;
        (0..=steps)
            .map(|k| {
                let t = self.duration * k as f64 / steps as f64;
                let (x, y) = self.position(t);
                (scenario.clearance(x, y), t)
            })
            .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
    }
}

/// Fits the spline through the grid path, inserting midpoints around any
/// stretch where the curve cuts into an obstacle until it clears them all.
pub fn smooth_spline(path: &GridPath, scenario: &Scenario, cfg: &AstarConfig) -> Result<SmoothPath> {
    if path.waypoints.len() < 2 {
        return Err(Error::InvalidArgument("smoothing needs at least two waypoints".into()));
    }
    let mut waypoints = path.waypoints.clone();
    // Pin the exact endpoints; the lattice nodes are within half a cell.
    waypoints[0] = (scenario.start.x, scenario.start.y);
    let last = waypoints.len() - 1;
    waypoints[last] = (scenario.goal.x, scenario.goal.y);
    waypoints.dedup_by(|a, b| (a.0 - b.0).hypot(a.1 - b.1) < 1e-12);
    if waypoints.len() < 2 {
        waypoints.push((scenario.goal.x, scenario.goal.y + 1e-9));
    }

    for _ in 0..=cfg.max_refinements {
        let smooth = SmoothPath::through(&waypoints, scenario, cfg.v_ref)?;
        let (clearance, t_worst) = smooth.min_clearance(scenario);
        if clearance > 0.0 {
            return Ok(smooth);
        }
        // densify the waypoint segments around the violation
        let s_worst = t_worst * cfg.v_ref;
        let mut acc = 0.0;
        let mut seg = 0;
        for (i, w) in waypoints.windows(2).enumerate() {
            let len = (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1);
            if acc + len >= s_worst {
                seg = i;
                break;
            }
            acc += len;
        }
        let lo = seg.saturating_sub(2);
        let hi = (seg + 3).min(waypoints.len() - 1);
        let mut dense = Vec::with_capacity(waypoints.len() + (hi - lo));
        dense.extend_from_slice(&waypoints[..=lo]);
        for i in lo..hi {
            let (a, b) = (waypoints[i], waypoints[i + 1]);
            dense.push((0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1)));
            dense.push(b);
        }
        dense.extend_from_slice(&waypoints[hi + 1..]);
        waypoints = dense;
    }
    Err(Error::PlannerFailed("smoothed A* path intersects an obstacle".into()))
}

/// Search, smooth, and sample `n_samples` points of the result.
pub fn plan(scenario: &Scenario, cfg: &AstarConfig, n_samples: usize) -> Result<(GridPath, SmoothPath, TrajectoryRecord)> {
    let grid = GridSpec::new(scenario, cfg.cell_size)?;
    let path = astar_search(scenario, &grid, cfg)?;
    let smooth = smooth_spline(&path, scenario, cfg)?;
    let record = smooth.sample(n_samples)?;
    Ok((path, smooth, record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{DynamicsParams, WindParams};
    use crate::environment::{BarrierParams, Bounds, Obstacle};

    fn open_world(obstacles: Vec<Obstacle>, wind: WindParams, c_d: f64) -> Scenario {
        Scenario {
            name: "test".into(),
            start: State::new(0.0, 0.0, 0.0, 0.0),
            goal: State::new(10.0, 6.0, 0.0, 0.0),
            horizon: 10.0,
            bounds: Bounds::default(),
            obstacles,
            dynamics: DynamicsParams { c_d, wind },
            barrier: BarrierParams::default(),
            u_max: 5.0,
        }
    }

    fn time_only() -> AstarConfig {
        AstarConfig { alpha: 0.0, gamma: 0.0, ..AstarConfig::default() }
    }

    #[test]
    fn coasting_edge_costs_only_time() {
        let sc = open_world(vec![], WindParams::CALM, 0.0);
        let grid = GridSpec::new(&sc, 1.0).unwrap();
        let cfg = AstarConfig { cell_size: 1.0, alpha: 3.0, gamma: 0.0, ..AstarConfig::default() };
        let c = edge_cost(&grid, (1, 1), (2, 2), 0.3, &sc, &cfg);
        assert!((c - SQRT_2 / 1.5).abs() < 1e-12);
    }

    #[test]
    fn tailwind_cancelling_drag_costs_time_and_barrier() {
        // Wx at the midpoint y = ly/2 and t = 0 equals ax; choose ax = c_d·v_ref.
        let wind = WindParams { ax: 0.45, ay: 0.0, lx: 10.0, ly: 10.0 };
        let mut sc = open_world(vec![Obstacle::new(8.0, 9.0, 0.5)], wind, 0.3);
        sc.bounds = Bounds { x_min: 0.0, x_max: 12.0, y_min: 0.0, y_max: 10.0 };
        let grid = GridSpec::new(&sc, 1.0).unwrap();
        let cfg = AstarConfig { cell_size: 1.0, alpha: 1.0, gamma: 0.5, ..AstarConfig::default() };
        let (from, to) = ((2, 5), (3, 5));
        let c = edge_cost(&grid, from, to, 0.0, &sc, &cfg);
        let expect = 1.0 / 1.5 + 0.5 * sc.phi(2.5, 5.0);
        assert!((c - expect).abs() < 1e-12, "{c} vs {expect}");
    }

    #[test]
    fn headwind_control_penalty() {
        // W = (-1, 0) at the midpoint, v_edge = (1, 0), c_d = 0.3 → ‖u‖² = 1.69
        let wind = WindParams { ax: -1.0, ay: 0.0, lx: 10.0, ly: 10.0 };
        let mut sc = open_world(vec![], wind, 0.3);
        sc.bounds = Bounds { x_min: 0.0, x_max: 12.0, y_min: 0.0, y_max: 10.0 };
        let grid = GridSpec::new(&sc, 1.0).unwrap();
        let cfg = AstarConfig { cell_size: 1.0, v_ref: 1.0, alpha: 1.0, gamma: 0.0, ..AstarConfig::default() };
        let c = edge_cost(&grid, (2, 5), (3, 5), 0.0, &sc, &cfg);
        assert!((c - (1.0 + 1.69)).abs() < 1e-12, "{c}");
    }

    #[test]
    fn empty_map_path_has_octile_length() {
        let sc = open_world(vec![], WindParams::CALM, 0.3);
        let cfg = AstarConfig { cell_size: 1.0, ..time_only() };
        let grid = GridSpec::new(&sc, 1.0).unwrap();
        let path = astar_search(&sc, &grid, &cfg).unwrap();
        let expect = 6.0 * SQRT_2 + 4.0;
        assert!((path.length() - expect).abs() < 1e-9, "{}", path.length());
        assert!((path.cost - expect / 1.5).abs() < 1e-9);
        for w in path.cells.windows(2) {
            assert!(w[0].0.abs_diff(w[1].0) <= 1 && w[0].1.abs_diff(w[1].1) <= 1 && w[0] != w[1]);
        }
    }

    #[test]
    fn ringed_goal_is_unreachable() {
        let ring: Vec<Obstacle> = (0..16)
            .map(|k| {
                let a = k as f64 * std::f64::consts::PI / 8.0;
                Obstacle::new(10.0 + 1.5 * a.cos(), 6.0 + 1.5 * a.sin(), 0.6)
            })
            .collect();
        let sc = open_world(ring, WindParams::CALM, 0.3);
        let grid = GridSpec::new(&sc, 0.25).unwrap();
        assert!(matches!(astar_search(&sc, &grid, &AstarConfig::default()), Err(Error::NoPath)));
    }

    #[test]
    fn path_avoids_blocked_cells() {
        let sc = crate::environment::load_scenario(crate::environment::bundled::STANDARD).unwrap();
        let grid = GridSpec::new(&sc, 0.25).unwrap();
        let path = astar_search(&sc, &grid, &AstarConfig::default()).unwrap();
        assert!(path.cells.iter().all(|c| !is_blocked(&sc, &grid, *c)));
        assert_eq!(path.cells[0], grid.cell_of(0.0, 0.0));
        assert_eq!(*path.cells.last().unwrap(), grid.cell_of(10.0, 6.0));
    }

    #[test]
    fn two_waypoint_spline_is_straight() {
        let sc = open_world(vec![], WindParams::CALM, 0.3);
        let sp = SmoothPath::through(&[(0.0, 0.0), (3.0, 4.0)], &sc, 1.0).unwrap();
        assert!((sp.duration() - 5.0).abs() < 1e-12);
        for k in 0..=10 {
            let t = 0.5 * k as f64;
            let (s, u) = sp.state_and_control(t);
            assert!((s.x - 0.6 * t).abs() < 1e-12 && (s.y - 0.8 * t).abs() < 1e-12);
            // no curvature: only drag compensation remains
            assert!((u.ux - 0.3 * 0.6).abs() < 1e-12 && (u.uy - 0.3 * 0.8).abs() < 1e-12);
        }
    }

    #[test]
    fn spline_passes_through_waypoints() {
        let sc = open_world(vec![], WindParams::CALM, 0.3);
        let pts = [(0.0, 0.0), (1.0, 0.5), (2.0, 0.5), (2.5, 1.5), (4.0, 2.0)];
        let sp = SmoothPath::through(&pts, &sc, 1.5).unwrap();
        let mut s = 0.0;
        for (i, p) in pts.iter().enumerate() {
            if i > 0 {
                s += (p.0 - pts[i - 1].0).hypot(p.1 - pts[i - 1].1);
            }
            let (x, y) = sp.position(s / 1.5);
            assert!((x - p.0).abs() < 1e-9 && (y - p.1).abs() < 1e-9);
        }
    }

    #[test]
    fn recovered_controls_satisfy_the_dynamics() {
        let wind = WindParams { ax: 0.5, ay: 0.5, lx: 10.0, ly: 10.0 };
        let sc = open_world(vec![], wind, 0.3);
        let pts = [(0.0, 0.0), (1.0, 0.5), (2.0, 0.5), (2.5, 1.5), (4.0, 2.0)];
        let sp = SmoothPath::through(&pts, &sc, 1.5).unwrap();
        let h = 1e-5;
        for k in 1..40 {
            let t = sp.duration() * k as f64 / 40.0;
            let (s, u) = sp.state_and_control(t);
            let (sp_, _) = sp.state_and_control(t + h);
            let (sm, _) = sp.state_and_control(t - h);
            let deriv = crate::dynamics::state_derivative(&s, &u, t, &sc.dynamics);
            let fd = [(sp_.x - sm.x), (sp_.y - sm.y), (sp_.vx - sm.vx), (sp_.vy - sm.vy)].map(|d| d / (2.0 * h));
            let rhs = deriv.as_array();
            for i in 0..4 {
                assert!((fd[i] - rhs[i]).abs() < 1e-6, "t={t} i={i} fd={} rhs={}", fd[i], rhs[i]);
            }
        }
    }

    #[test]
    fn prefers_the_tailwind_corridor() {
        // A fast reference speed keeps t_est near 0, freezing Wx = ax·sin(πy/ly).
        // The two detours around the blocker are mirror images; only the
        // wind sign tells them apart.
        for (ax, upper) in [(1.0, true), (-1.0, false)] {
            let wind = WindParams { ax, ay: 0.0, lx: 10.0, ly: 10.0 };
            let mut sc = open_world(vec![Obstacle::new(5.0, 0.0, 2.0)], wind, 0.3);
            sc.goal = State::new(10.0, 0.0, 0.0, 0.0);
            sc.bounds = Bounds { x_min: -1.0, x_max: 11.0, y_min: -5.0, y_max: 5.0 };
            let cfg = AstarConfig { cell_size: 0.5, v_ref: 1000.0, alpha: 1.0, gamma: 0.0, ..AstarConfig::default() };
            let grid = GridSpec::new(&sc, cfg.cell_size).unwrap();
            let path = astar_search(&sc, &grid, &cfg).unwrap();
            let mid = path.waypoints.iter().find(|w| (w.0 - 5.0).abs() < 1e-9).unwrap();
            assert_eq!(mid.1 > 0.0, upper, "ax={ax} crossed at y={}", mid.1);
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn heuristic_search_matches_dijkstra(
            obs in proptest::collection::vec((1.0f64..9.0, 1.0f64..5.0, 0.3f64..1.0), 0..5),
            gamma in 0.0f64..0.5,
        ) {
            let obstacles: Vec<Obstacle> = obs.iter().map(|&(x, y, r)| Obstacle::new(x, y, r)).collect();
            let sc = open_world(obstacles, WindParams::CALM, 0.3);
            let cfg = AstarConfig { cell_size: 0.5, gamma, ..AstarConfig::default() };
            let grid = GridSpec::new(&sc, cfg.cell_size).unwrap();
            match (search(&sc, &grid, &cfg, true), search(&sc, &grid, &cfg, false)) {
                (Ok(a), Ok(d)) => proptest::prop_assert!((a.cost - d.cost).abs() <= 1e-9 * d.cost.max(1.0)),
                (Err(Error::NoPath), Err(Error::NoPath)) => {}
                other => proptest::prop_assert!(false, "disagreement: {other:?}"),
            }
        }
    }

    #[test]
    fn standard_plan_is_collision_free() {
        let sc = crate::environment::load_scenario(crate::environment::bundled::STANDARD).unwrap();
        let (_, smooth, rec) = plan(&sc, &AstarConfig::default(), 400).unwrap();
        assert!(smooth.min_clearance(&sc).0 > 0.0);
        assert_eq!(rec.first().state.position_distance(&sc.start), 0.0);
        assert!(rec.last().state.position_distance(&sc.goal) < 1e-9);
    }
}
