//! Circular obstacles, the smooth barrier potential built on their signed
//! distances, and scenario documents.
//!
//! Scenario files are TOML. The grammar is documented in `SCENARIO.md` at the
//! crate root; `schema_version` must be `1`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicsParams, State, WindParams};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level tables a scenario document may carry that belong to planner
/// configuration rather than to the world definition.
pub const PLANNER_SECTIONS: &[&str] = &["weights", "curriculum", "pinn", "train", "astar", "kinorrt", "eval"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

impl Obstacle {
    pub const fn new(cx: f64, cy: f64, r: f64) -> Self {
        Self { cx, cy, r }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BarrierParams {
    pub eps: f64,
    pub alpha: f64,
}

impl Default for BarrierParams {
    fn default() -> Self {
        Self { eps: 0.01, alpha: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Self { x_min: -1.0, x_max: 12.0, y_min: -1.0, y_max: 8.0 }
    }
}

impl Bounds {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }
}

/// Signed distance from `(x, y)` to the obstacle boundary: negative inside.
pub fn signed_distance(o: &Obstacle, x: f64, y: f64) -> f64 {
    (x - o.cx).hypot(y - o.cy) - o.r
}

/// `ln(1 + e^z)` without overflow.
pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Logistic function, the derivative of [`softplus`].
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Barrier contribution of a single obstacle as a function of signed
/// distance `d`.
pub fn barrier_of_distance(bp: &BarrierParams, d: f64) -> f64 {
    1.0 / (d * d + bp.eps) + softplus(-bp.alpha * d)
}

/// Derivative of [`barrier_of_distance`] with respect to `d`.
pub fn barrier_distance_slope(bp: &BarrierParams, d: f64) -> f64 {
    let q = d * d + bp.eps;
    -2.0 * d / (q * q) - bp.alpha * sigmoid(-bp.alpha * d)
}

/// Total barrier potential at `(x, y)`: the sum over obstacles of an
/// inverse-square proximity term and a softplus penetration term.
pub fn barrier_phi(obstacles: &[Obstacle], bp: &BarrierParams, x: f64, y: f64) -> f64 {
    obstacles
        .iter()
        .map(|o| barrier_of_distance(bp, signed_distance(o, x, y)))
        .sum()
}

/// Analytic gradient of [`barrier_phi`].
///
/// Fails at an exact obstacle center, where the radial direction is
/// undefined.
pub fn barrier_grad(obstacles: &[Obstacle], bp: &BarrierParams, x: f64, y: f64) -> Result<(f64, f64)> {
    let mut gx = 0.0;
    let mut gy = 0.0;
    for o in obstacles {
        let (dx, dy) = (x - o.cx, y - o.cy);
        let rho = dx.hypot(dy);
        if rho == 0.0 {
            return Err(Error::SingularGradient { cx: o.cx, cy: o.cy });
        }
        let slope = barrier_distance_slope(bp, rho - o.r);
        gx += slope * dx / rho;
        gy += slope * dy / rho;
    }
    Ok((gx, gy))
}

/// Value and gradient together; at an exact center the gradient is taken
/// as zero (the potential is locally symmetric there).
pub(crate) fn barrier_phi_and_grad(obstacles: &[Obstacle], bp: &BarrierParams, x: f64, y: f64) -> (f64, f64, f64) {
    let (mut phi, mut gx, mut gy) = (0.0, 0.0, 0.0);
    for o in obstacles {
        let (dx, dy) = (x - o.cx, y - o.cy);
        let rho = dx.hypot(dy);
        let d = rho - o.r;
        phi += barrier_of_distance(bp, d);
        if rho > 0.0 {
            let slope = barrier_distance_slope(bp, d);
            gx += slope * dx / rho;
            gy += slope * dy / rho;
        }
    }
    (phi, gx, gy)
}

/// Smallest signed distance from `(x, y)` to any obstacle, `+inf` when
/// there are none.
pub fn min_signed_distance(obstacles: &[Obstacle], x: f64, y: f64) -> f64 {
    obstacles
        .iter()
        .map(|o| signed_distance(o, x, y))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub start: State,
    pub goal: State,
    /// Flight horizon `T` in seconds.
    pub horizon: f64,
    pub bounds: Bounds,
    pub obstacles: Vec<Obstacle>,
    pub dynamics: DynamicsParams,
    pub barrier: BarrierParams,
    pub u_max: f64,
}

impl Scenario {
    pub fn phi(&self, x: f64, y: f64) -> f64 {
        barrier_phi(&self.obstacles, &self.barrier, x, y)
    }

    pub fn clearance(&self, x: f64, y: f64) -> f64 {
        min_signed_distance(&self.obstacles, x, y)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: String| Err(Error::ScenarioInvariant { field: field.into(), reason });
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return bad("horizon", format!("must be positive, got {}", self.horizon));
        }
        if !(self.u_max > 0.0) {
            return bad("u_max", format!("must be positive, got {}", self.u_max));
        }
        let b = &self.bounds;
        if !(b.x_max > b.x_min) || !(b.y_max > b.y_min) {
            return bad("bounds", "max must exceed min on both axes".into());
        }
        if let Err(e) = self.dynamics.validate() {
            return bad("dynamics", e.to_string());
        }
        if !(self.barrier.eps > 0.0) {
            return bad("barrier.eps", format!("must be positive, got {}", self.barrier.eps));
        }
        if !(self.barrier.alpha > 0.0) {
            return bad("barrier.alpha", format!("must be positive, got {}", self.barrier.alpha));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !(o.r > 0.0) || !o.cx.is_finite() || !o.cy.is_finite() {
                return bad(&format!("obstacles[{i}]"), format!("radius must be positive, got {}", o.r));
            }
        }
        for (field, s) in [("start", &self.start), ("goal", &self.goal)] {
            if !s.is_finite() {
                return bad(field, "must be finite".into());
            }
            if !b.contains(s.x, s.y) {
                return bad(field, format!("({}, {}) lies outside the world bounds", s.x, s.y));
            }
            for (i, o) in self.obstacles.iter().enumerate() {
                let d = signed_distance(o, s.x, s.y);
                if !(d > 0.0) {
                    return bad(field, format!("lies inside obstacle {i} (signed distance {d})"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EndpointDoc {
    x: f64,
    y: f64,
    #[serde(default)]
    vx: f64,
    #[serde(default)]
    vy: f64,
}

impl From<EndpointDoc> for State {
    fn from(e: EndpointDoc) -> Self {
        State::new(e.x, e.y, e.vx, e.vy)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DragDoc {
    #[serde(default = "default_drag")]
    c_d: f64,
}

fn default_drag() -> f64 {
    0.3
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    schema_version: u32,
    #[serde(default)]
    name: Option<String>,
    horizon: f64,
    #[serde(default = "default_u_max")]
    u_max: f64,
    start: EndpointDoc,
    goal: EndpointDoc,
    #[serde(default)]
    bounds: Bounds,
    #[serde(default)]
    dynamics: Option<DragDoc>,
    #[serde(default)]
    wind: Option<WindParams>,
    #[serde(default)]
    barrier: BarrierParams,
    #[serde(default)]
    obstacles: Vec<Obstacle>,
}

fn default_u_max() -> f64 {
    5.0
}

/// Parses a scenario document, applying `key=value` overrides (dotted keys,
/// TOML values) before validation.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    let table = parse_document(text, &[])?;
    scenario_from_table(&table)
}

/// Parses a TOML document and applies `--set` style overrides to it.
pub fn parse_document(text: &str, overrides: &[(String, String)]) -> Result<toml::Table> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::ScenarioParse(e.to_string()))?;
    for (key, value) in overrides {
        apply_override(&mut table, key, value)?;
    }
    Ok(table)
}

/// Sets `key` (dotted path) to `value`, parsed as a TOML value; bare words
/// that are not valid TOML are taken as strings.
pub fn apply_override(table: &mut toml::Table, key: &str, value: &str) -> Result<()> {
    let parsed: toml::Value = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::ScenarioParse(format!("malformed override key `{key}`")));
    }
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::ScenarioParse(format!("override `{key}`: `{part}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

pub fn scenario_from_table(table: &toml::Table) -> Result<Scenario> {
    let mut world = table.clone();
    for section in PLANNER_SECTIONS {
        world.remove(*section);
    }
    let doc: ScenarioDoc = toml::Value::Table(world)
        .try_into()
        .map_err(|e: toml::de::Error| Error::ScenarioParse(e.to_string()))?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::ScenarioInvariant {
            field: "schema_version".into(),
            reason: format!("unsupported version {}, expected {SCHEMA_VERSION}", doc.schema_version),
        });
    }
    let scenario = Scenario {
        name: doc.name.unwrap_or_else(|| "scenario".into()),
        start: doc.start.into(),
        goal: doc.goal.into(),
        horizon: doc.horizon,
        bounds: doc.bounds,
        obstacles: doc.obstacles,
        dynamics: DynamicsParams {
            c_d: doc.dynamics.map(|d| d.c_d).unwrap_or_else(default_drag),
            wind: doc.wind.unwrap_or(WindParams::CALM),
        },
        barrier: doc.barrier,
        u_max: doc.u_max,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// The bundled scenario files, embedded at compile time.
pub mod bundled {
    pub const STANDARD: &str = include_str!("../scenarios/standard.scenario");
    pub const DENSE: &str = include_str!("../scenarios/dense.scenario");

    pub fn by_name(name: &str) -> Option<&'static str> {
        match name {
            "standard" | "standard.scenario" => Some(STANDARD),
            "dense" | "dense.scenario" => Some(DENSE),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const O: Obstacle = Obstacle::new(5.0, 3.0, 1.0);

    #[test]
    fn signed_distance_examples() {
        assert_eq!(signed_distance(&O, 5.0, 3.0), -1.0);
        assert_eq!(signed_distance(&O, 7.0, 3.0), 1.0);
        assert_eq!(signed_distance(&O, 5.0, 4.0), 0.0);
    }

    #[test]
    fn barrier_examples() {
        let bp = BarrierParams::default();
        assert_eq!(barrier_phi(&[], &bp, 1.0, 2.0), 0.0);

        let at_one_meter = barrier_phi(&[O], &bp, 7.0, 3.0);
        let expect = 1.0 / 1.01 + (1.0 + (-10f64).exp()).ln();
        assert!((at_one_meter - expect).abs() < 1e-14);
        assert!((at_one_meter - 0.990144).abs() < 1e-6);

        let at_center = barrier_phi(&[O], &bp, 5.0, 3.0);
        let expect = 1.0 / 1.01 + (1.0 + 10f64.exp()).ln();
        assert!((at_center - expect).abs() < 1e-12);
        assert!((at_center - 10.990144).abs() < 1e-6);
    }

    #[test]
    fn gradient_examples() {
        let bp = BarrierParams::default();
        assert_eq!(barrier_grad(&[], &bp, 0.0, 0.0).unwrap(), (0.0, 0.0));
        let (gx, gy) = barrier_grad(&[O], &bp, 7.0, 3.0).unwrap();
        assert_eq!(gy, 0.0);
        // Φ decreases away from the obstacle, so the gradient points back at it;
        // the repulsive force -∇Φ points along +x.
        assert!(gx < 0.0);
        assert!(matches!(
            barrier_grad(&[O], &bp, 5.0, 3.0),
            Err(Error::SingularGradient { .. })
        ));
    }

    #[test]
    fn monotone_outside_along_a_ray() {
        let bp = BarrierParams::default();
        let mut prev = f64::INFINITY;
        for k in 0..=400 {
            let d = k as f64 * 0.01;
            let phi = barrier_phi(&[O], &bp, 6.0 + d, 3.0);
            assert!(phi < prev, "not decreasing at d={d}");
            prev = phi;
        }
    }

    #[test]
    fn softplus_is_stable() {
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((softplus(800.0) - 800.0).abs() < 1e-12);
        assert!(softplus(-800.0) >= 0.0);
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bundled_standard() {
        let s = load_scenario(bundled::STANDARD).unwrap();
        assert_eq!(s.start, State::new(0.0, 0.0, 0.0, 0.0));
        assert_eq!(s.goal, State::new(10.0, 6.0, 0.0, 0.0));
        assert_eq!(s.obstacles.len(), 3);
    }

    #[test]
    fn bundled_dense() {
        let s = load_scenario(bundled::DENSE).unwrap();
        assert!(s.obstacles.len() >= 6);
    }

    #[test]
    fn straight_line_hits_an_obstacle_in_standard() {
        let s = load_scenario(bundled::STANDARD).unwrap();
        let hit = (0..=1000).any(|k| {
            let w = k as f64 / 1000.0;
            s.clearance(10.0 * w, 6.0 * w) < 0.0
        });
        assert!(hit);
    }

    const MINIMAL: &str = r#"
schema_version = 1
horizon = 5.0
[start]
x = 0.0
y = 0.0
[goal]
x = 4.0
y = 4.0
"#;

    #[test]
    fn defaults_fill_optional_fields() {
        let s = load_scenario(MINIMAL).unwrap();
        assert_eq!(s.bounds, Bounds::default());
        assert_eq!(s.barrier, BarrierParams::default());
        assert_eq!(s.u_max, 5.0);
        assert_eq!(s.dynamics.c_d, 0.3);
        assert_eq!(s.goal.vx, 0.0);
    }

    #[test]
    fn goal_inside_obstacle_is_rejected() {
        let doc = format!("{MINIMAL}\n[[obstacles]]\ncx = 4.0\ncy = 4.0\nr = 0.5\n");
        match load_scenario(&doc) {
            Err(Error::ScenarioInvariant { field, .. }) => assert_eq!(field, "goal"),
            other => panic!("expected invariant error, got {other:?}"),
        }
    }

    #[test]
    fn parse_and_version_errors() {
        assert!(matches!(load_scenario("horizon = ="), Err(Error::ScenarioParse(_))));
        let doc = MINIMAL.replace("schema_version = 1", "schema_version = 2");
        assert!(matches!(load_scenario(&doc), Err(Error::ScenarioInvariant { .. })));
        let doc = format!("{MINIMAL}\n[mystery]\nk = 1\n");
        assert!(matches!(load_scenario(&doc), Err(Error::ScenarioParse(_))));
    }

    #[test]
    fn overrides_take_precedence() {
        let overrides = vec![
            ("wind.ax".to_string(), "0.25".to_string()),
            ("horizon".to_string(), "9".to_string()),
        ];
        let table = parse_document(MINIMAL, &overrides).unwrap();
        let s = scenario_from_table(&table).unwrap();
        assert_eq!(s.dynamics.wind.ax, 0.25);
        assert_eq!(s.horizon, 9.0);
    }

    fn obstacle_strategy() -> impl Strategy<Value = Obstacle> {
        (-5.0f64..5.0, -5.0f64..5.0, 0.1f64..2.0).prop_map(|(cx, cy, r)| Obstacle::new(cx, cy, r))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn gradient_matches_central_differences(
            obstacles in prop::collection::vec(obstacle_strategy(), 1..4),
            x in -6.0f64..6.0,
            y in -6.0f64..6.0,
        ) {
            let bp = BarrierParams::default();
            // keep away from centers and from the d = 0 kink of the inverse-square term's scale
            prop_assume!(obstacles.iter().all(|o| (x - o.cx).hypot(y - o.cy) > 1e-2));
            let (gx, gy) = barrier_grad(&obstacles, &bp, x, y).unwrap();
            let h = 1e-5;
            let fx = (barrier_phi(&obstacles, &bp, x + h, y) - barrier_phi(&obstacles, &bp, x - h, y)) / (2.0 * h);
            let fy = (barrier_phi(&obstacles, &bp, x, y + h) - barrier_phi(&obstacles, &bp, x, y - h)) / (2.0 * h);
            let scale = gx.abs().max(gy.abs()).max(1.0);
            prop_assert!((gx - fx).abs() <= 1e-5 * scale, "gx={} fd={}", gx, fx);
            prop_assert!((gy - fy).abs() <= 1e-5 * scale, "gy={} fd={}", gy, fy);
        }

        #[test]
        fn potential_is_additive(a in obstacle_strategy(), b in obstacle_strategy(), x in -6.0f64..6.0, y in -6.0f64..6.0) {
            let bp = BarrierParams::default();
            let both = barrier_phi(&[a, b], &bp, x, y);
            let sum = barrier_phi(&[a], &bp, x, y) + barrier_phi(&[b], &bp, x, y);
            prop_assert!((both - sum).abs() <= 1e-12 * both.abs().max(1.0));
        }

        #[test]
        fn potential_is_positive(a in obstacle_strategy(), x in -6.0f64..6.0, y in -6.0f64..6.0) {
            prop_assert!(barrier_phi(&[a], &BarrierParams::default(), x, y) > 0.0);
        }
    }
}
