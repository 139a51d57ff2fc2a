//! Kinodynamic RRT*: the tree grows by integrating the true dynamics under
//! constant controls, and rewiring re-steers instead of assuming exact
//! connections.

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, Control, State, DEFAULT_DT};
use crate::environment::Scenario;
use crate::error::{Error, Result};
use crate::trajectory::{Sample, TrajectoryRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RrtConfig {
    pub max_iterations: usize,
    /// Duration of every constant-control segment.
    pub segment_duration: f64,
    /// Integration step inside a segment.
    pub dt: f64,
    pub goal_tolerance: f64,
    pub goal_bias: f64,
    pub neighbor_radius: f64,
    /// Rewiring considers at most this many nearest nodes inside the radius.
    pub max_neighbors: usize,
    /// Random control candidates per steer.
    pub candidates: usize,
    /// Segments whose clearance drops to this value or below are rejected.
    pub safety_buffer: f64,
    /// A re-steered segment must land this close to its target.
    pub rewire_tolerance: f64,
    /// Weight of velocity in the state metric.
    pub velocity_weight: f64,
    /// Sampled target velocities lie in `[-sample_speed, sample_speed]²`.
    pub sample_speed: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub seed: u64,
}

impl Default for RrtConfig {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            segment_duration: 0.4,
            dt: DEFAULT_DT,
            goal_tolerance: 0.4,
            goal_bias: 0.1,
            neighbor_radius: 1.5,
            max_neighbors: 8,
            candidates: 16,
            safety_buffer: 0.05,
            rewire_tolerance: 0.1,
            velocity_weight: 0.2,
            sample_speed: 2.0,
            alpha: 0.01,
            gamma: 0.1,
            seed: 42,
        }
    }
}

impl RrtConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.segment_duration > 0.0) || !(self.dt > 0.0) || self.dt > self.segment_duration {
            return Err(Error::InvalidArgument("segment_duration and dt must be positive with dt ≤ segment_duration".into()));
        }
        if !(self.goal_tolerance > 0.0) {
            return Err(Error::InvalidArgument("goal_tolerance must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.goal_bias) {
            return Err(Error::InvalidArgument("goal_bias must lie in [0, 1]".into()));
        }
        if !(self.neighbor_radius >= 0.0) || self.candidates == 0 {
            return Err(Error::InvalidArgument("neighbor_radius must be non-negative and candidates at least 1".into()));
        }
        if !(self.alpha >= 0.0) || !(self.gamma >= 0.0) {
            return Err(Error::InvalidArgument("RRT weights must be non-negative".into()));
        }
        Ok(())
    }

    fn steps(&self) -> usize {
        (self.segment_duration / self.dt).round().max(1.0) as usize
    }

    pub fn distance(&self, a: &State, b: &State) -> f64 {
        (a.x - b.x).hypot(a.y - b.y) + self.velocity_weight * (a.vx - b.vx).hypot(a.vy - b.vy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub state: State,
    pub time: f64,
    pub parent: Option<usize>,
    pub control: Control,
    /// Number of integration steps on the incoming segment.
    pub steps: usize,
    pub cost: f64,
}

/// A steered segment: the control, its integrated states (first is the
/// start), and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub control: Control,
    pub states: Vec<State>,
    pub cost: f64,
}

impl Segment {
    pub fn end(&self) -> &State {
        self.states.last().expect("segment has states")
    }
}

/// `∫(α‖u‖² + γΦ) dt` by the trapezoid rule over the segment samples.
pub fn segment_cost(states: &[State], control: &Control, dt: f64, scenario: &Scenario, alpha: f64, gamma: f64) -> f64 {
    let f = |s: &State| alpha * control.norm_sq() + gamma * scenario.phi(s.x, s.y);
    states.windows(2).map(|w| 0.5 * dt * (f(&w[0]) + f(&w[1]))).sum()
}

fn segment_is_safe(states: &[State], scenario: &Scenario, buffer: f64) -> bool {
    states
        .iter()
        .all(|s| scenario.bounds.contains(s.x, s.y) && scenario.clearance(s.x, s.y) > buffer)
}

/// The control that would reach `target`'s position in one segment from rest
/// dynamics, ignoring drag and wind.
fn aiming_control(from: &State, target: &State, duration: f64, u_max: f64) -> Control {
    let k = 2.0 / (duration * duration);
    Control::new(
        k * (target.x - from.x - from.vx * duration),
        k * (target.y - from.y - from.vy * duration),
    )
    .clamped(u_max)
}

/// Integrates `k` random controls plus an aiming control from `from` for one
/// segment and keeps the safe one ending nearest `target`. `None` when every
/// candidate is unsafe.
pub fn steer<R: Rng>(
    from: &TreeNode,
    target: &State,
    cfg: &RrtConfig,
    scenario: &Scenario,
    rng: &mut R,
) -> Option<Segment> {
    let steps = cfg.steps();
    let u_dist = Uniform::new_inclusive(-scenario.u_max, scenario.u_max);
    let mut best: Option<(f64, Control, Vec<State>)> = None;
    let aim = aiming_control(&from.state, target, cfg.segment_duration, scenario.u_max);
    let mut schedule = vec![aim; steps];
    for c in 0..=cfg.candidates {
        let u = if c == 0 { aim } else { Control::new(u_dist.sample(rng), u_dist.sample(rng)) };
        schedule.fill(u);
        let Ok(states) = integrate(from.state, &schedule, &scenario.dynamics, cfg.dt, from.time) else {
            continue;
        };
        if !segment_is_safe(&states, scenario, cfg.safety_buffer) {
            continue;
        }
        let d = cfg.distance(states.last().expect("non-empty"), target);
        if best.as_ref().is_none_or(|b| d < b.0) {
            best = Some((d, u, states));
        }
    }
    best.map(|(_, control, states)| {
        let cost = segment_cost(&states, &control, cfg.dt, scenario, cfg.alpha, cfg.gamma);
        Segment { control, states, cost }
    })
}

#[derive(Debug, Clone)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
    children: Vec<Vec<usize>>,
}

impl Tree {
    fn new(root: State) -> Self {
        let node = TreeNode { state: root, time: 0.0, parent: None, control: Control::new(0.0, 0.0), steps: 0, cost: 0.0 };
        Self { nodes: vec![node], children: vec![Vec::new()] }
    }

    fn push(&mut self, parent: usize, seg: &Segment, steps: usize, dt: f64) -> usize {
        let p = &self.nodes[parent];
        let node = TreeNode {
            state: *seg.end(),
            time: p.time + steps as f64 * dt,
            parent: Some(parent),
            control: seg.control,
            steps,
            cost: p.cost + seg.cost,
        };
        self.nodes.push(node);
        self.children.push(Vec::new());
        let idx = self.nodes.len() - 1;
        self.children[parent].push(idx);
        idx
    }

    fn is_ancestor(&self, candidate: usize, mut node: usize) -> bool {
        while let Some(p) = self.nodes[node].parent {
            if p == candidate {
                return true;
            }
            node = p;
        }
        false
    }

    fn subtree(&self, root: usize) -> Vec<usize> {
        let mut out = vec![root];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&self.children[out[i]]);
            i += 1;
        }
        out
    }

    /// Nodes ordered by distance to `target`, up to `limit`, within `radius`.
    fn near(&self, target: &State, cfg: &RrtConfig) -> Vec<usize> {
        let r = cfg.neighbor_radius;
        let mut near: Vec<(f64, usize)> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| (n.state.x - target.x).abs() <= r && (n.state.y - target.y).abs() <= r)
            .map(|(i, n)| (cfg.distance(&n.state, target), i))
            .filter(|(d, _)| *d <= r)
            .collect();
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        near.truncate(cfg.max_neighbors);
        near.into_iter().map(|(_, i)| i).collect()
    }

    fn nearest(&self, target: &State, cfg: &RrtConfig) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, n) in self.nodes.iter().enumerate() {
            // the position gap alone already bounds the metric from below
            if (n.state.x - target.x).abs() >= best.0 || (n.state.y - target.y).abs() >= best.0 {
                continue;
            }
            let d = cfg.distance(&n.state, target);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    /// States along the segment entering `node`, replayed from its parent.
    pub fn replay(&self, node: usize, scenario: &Scenario, dt: f64) -> Result<Vec<State>> {
        let n = &self.nodes[node];
        let p = &self.nodes[n.parent.ok_or_else(|| Error::InvalidArgument("root has no segment".into()))?];
        integrate(p.state, &vec![n.control; n.steps], &scenario.dynamics, dt, p.time)
    }

    /// Moves `node` under `new_parent` with the given segment and replays the
    /// whole subtree with its stored controls. The change is committed only
    /// if every replayed segment stays safe, no cost in the subtree
    /// increases, and nodes that reached the goal still do.
    fn try_reparent(
        &mut self,
        node: usize,
        new_parent: usize,
        seg: &Segment,
        steps: usize,
        scenario: &Scenario,
        cfg: &RrtConfig,
    ) -> bool {
        let sub = self.subtree(node);
        let mut staged: Vec<(usize, State, f64, f64)> = Vec::with_capacity(sub.len());
        let p = &self.nodes[new_parent];
        let new_cost = p.cost + seg.cost;
        if !(new_cost < self.nodes[node].cost) {
            return false;
        }
        staged.push((node, *seg.end(), p.time + steps as f64 * cfg.dt, new_cost));
        let goal = &scenario.goal;
        let reaches = |s: &State| s.position_distance(goal) <= cfg.goal_tolerance;
        for &i in &sub[1..] {
            let n = &self.nodes[i];
            let parent = n.parent.expect("non-root");
            let &(_, ps, pt, pc) = staged.iter().find(|e| e.0 == parent).expect("parent staged first");
            let Ok(states) = integrate(ps, &vec![n.control; n.steps], &scenario.dynamics, cfg.dt, pt) else {
                return false;
            };
            if !segment_is_safe(&states, scenario, cfg.safety_buffer) {
                return false;
            }
            let cost = pc + segment_cost(&states, &n.control, cfg.dt, scenario, cfg.alpha, cfg.gamma);
            let end = *states.last().expect("non-empty");
            if cost > n.cost || (reaches(&n.state) && !reaches(&end)) {
                return false;
            }
            staged.push((i, end, pt + n.steps as f64 * cfg.dt, cost));
        }
        if reaches(&self.nodes[node].state) && !reaches(seg.end()) {
            return false;
        }
        let old_parent = self.nodes[node].parent.expect("non-root");
        self.children[old_parent].retain(|&c| c != node);
        self.children[new_parent].push(node);
        let n = &mut self.nodes[node];
        n.parent = Some(new_parent);
        n.control = seg.control;
        n.steps = steps;
        for (i, state, time, cost) in staged {
            let n = &mut self.nodes[i];
            n.state = state;
            n.time = time;
            n.cost = cost;
        }
        true
    }

    /// Samples from the root to `node`, concatenating replayed segments.
    pub fn path_to(&self, node: usize, scenario: &Scenario, dt: f64) -> Result<TrajectoryRecord> {
        let mut chain = vec![node];
        while let Some(p) = self.nodes[*chain.last().expect("non-empty")].parent {
            chain.push(p);
        }
        chain.reverse();
        if chain.len() < 2 {
            return Err(Error::PlannerFailed("goal path has no segments".into()));
        }
        let mut samples = Vec::new();
        for &i in &chain[1..] {
            let n = &self.nodes[i];
            let p = &self.nodes[n.parent.expect("non-root")];
            let states = self.replay(i, scenario, dt)?;
            for (k, s) in states[..states.len() - 1].iter().enumerate() {
                samples.push(Sample::new(p.time + k as f64 * dt, *s, n.control));
            }
        }
        let last = &self.nodes[node];
        samples.push(Sample::new(last.time, last.state, last.control));
        TrajectoryRecord::new("kinorrt", samples)
    }
}

#[derive(Debug, Clone)]
pub struct RrtOutcome {
    pub tree: Tree,
    pub goal_node: usize,
    pub trajectory: TrajectoryRecord,
    /// Best goal cost after each iteration that had a solution.
    pub best_cost_history: Vec<f64>,
    pub iterations: usize,
}

pub fn plan(scenario: &Scenario, cfg: &RrtConfig) -> Result<RrtOutcome> {
    plan_inspect(scenario, cfg, |_| {})
}

/// Like [`plan`], calling `inspect` with the tree after every iteration.
pub fn plan_inspect(scenario: &Scenario, cfg: &RrtConfig, mut inspect: impl FnMut(&Tree)) -> Result<RrtOutcome> {
    cfg.validate()?;
    scenario.validate()?;
    let steps = cfg.steps();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let b = scenario.bounds;
    let sx = Uniform::new_inclusive(b.x_min, b.x_max);
    let sy = Uniform::new_inclusive(b.y_min, b.y_max);
    let sv = Uniform::new_inclusive(-cfg.sample_speed, cfg.sample_speed);
    let unit = Uniform::new(0.0, 1.0);
    let goal = scenario.goal;
    let reaches = |s: &State| s.position_distance(&goal) <= cfg.goal_tolerance;

    let mut tree = Tree::new(scenario.start);
    let mut best: Option<usize> = None;
    let mut history = Vec::new();

    for _ in 0..cfg.max_iterations {
        let target = if unit.sample(&mut rng) < cfg.goal_bias {
            goal
        } else {
            State::new(sx.sample(&mut rng), sy.sample(&mut rng), sv.sample(&mut rng), sv.sample(&mut rng))
        };
        let nearest = tree.nearest(&target, cfg);
        if let Some(seg) = steer(&tree.nodes[nearest], &target, cfg, scenario, &mut rng) {
            let end = *seg.end();
            // choose the cheapest parent that can re-steer onto this state
            let mut parent = nearest;
            let mut chosen = seg;
            let mut cost = tree.nodes[nearest].cost + chosen.cost;
            for cand in tree.near(&end, cfg) {
                if cand == nearest || tree.nodes[cand].cost >= cost {
                    continue;
                }
                if let Some(s) = steer(&tree.nodes[cand], &end, cfg, scenario, &mut rng) {
                    let c = tree.nodes[cand].cost + s.cost;
                    if c < cost && cfg.distance(s.end(), &end) <= cfg.rewire_tolerance {
                        parent = cand;
                        cost = c;
                        chosen = s;
                    }
                }
            }
            let new = tree.push(parent, &chosen, steps, cfg.dt);

            for nb in tree.near(&tree.nodes[new].state.clone(), cfg) {
                if nb == new || nb == 0 || tree.nodes[new].cost >= tree.nodes[nb].cost || tree.is_ancestor(nb, new) {
                    continue;
                }
                let target = tree.nodes[nb].state;
                if let Some(s) = steer(&tree.nodes[new], &target, cfg, scenario, &mut rng) {
                    if cfg.distance(s.end(), &target) <= cfg.rewire_tolerance {
                        tree.try_reparent(nb, new, &s, steps, scenario, cfg);
                    }
                }
            }

            if reaches(&tree.nodes[new].state) && best.is_none_or(|b| tree.nodes[new].cost < tree.nodes[b].cost) {
                best = Some(new);
            }
        }
        if let Some(b) = best {
            history.push(tree.nodes[b].cost);
        }
        inspect(&tree);
    }

    let goal_node = best.ok_or_else(|| {
        Error::PlannerFailed(format!("no goal connection within {} iterations", cfg.max_iterations))
    })?;
    let trajectory = tree.path_to(goal_node, scenario, cfg.dt)?;
    Ok(RrtOutcome { tree, goal_node, trajectory, best_cost_history: history, iterations: cfg.max_iterations })
}
