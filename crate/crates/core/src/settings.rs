//! Planner settings read from the optional planner sections of a scenario
//! document (`[weights]`, `[curriculum]`, `[pinn]`, `[train]`, `[astar]`,
//! `[kinorrt]`, `[eval]`).

use serde::{Deserialize, Serialize};

use crate::astar::AstarConfig;
use crate::diffnet::MlpConfig;
use crate::environment::PLANNER_SECTIONS;
use crate::error::{Error, Result};
use crate::kinorrt::RrtConfig;
use crate::metrics::EVAL_SAMPLES;
use crate::pinn::{CurriculumSchedule, LossWeights, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Samples per exported PINN and A* trajectory and per metric evaluation.
    pub samples: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { samples: EVAL_SAMPLES }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerSettings {
    pub weights: LossWeights,
    pub curriculum: CurriculumSchedule,
    pub pinn: MlpConfig,
    pub train: TrainConfig,
    pub astar: AstarConfig,
    pub kinorrt: RrtConfig,
    pub eval: EvalConfig,
}

impl PlannerSettings {
    /// Reads the planner sections of a parsed document; world keys are
    /// ignored here.
    pub fn from_table(table: &toml::Table) -> Result<Self> {
        let mut sections = toml::Table::new();
        for name in PLANNER_SECTIONS {
            if let Some(v) = table.get(*name) {
                sections.insert(name.to_string(), v.clone());
            }
        }
        let s: Self = toml::Value::Table(sections)
            .try_into()
            .map_err(|e: toml::de::Error| Error::ScenarioParse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    /// Uses `seed` for network initialization, collocation sampling and
    /// tree growth.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.pinn.seed = seed;
        self.train.seed = seed;
        self.kinorrt.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        self.curriculum.validate()?;
        self.pinn.validate()?;
        self.train.validate()?;
        self.astar.validate()?;
        self.kinorrt.validate()?;
        if self.eval.samples < 3 {
            return Err(Error::InvalidArgument("eval.samples must be at least 3".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{bundled, parse_document};

    #[test]
    fn bundled_scenarios_use_defaults() {
        let t = parse_document(bundled::STANDARD, &[]).unwrap();
        assert_eq!(PlannerSettings::from_table(&t).unwrap(), PlannerSettings::default());
    }

    #[test]
    fn overrides_reach_planner_sections() {
        let ov = [("train.epochs".to_string(), "7".to_string()), ("astar.cell_size".to_string(), "0.5".to_string())];
        let t = parse_document(bundled::STANDARD, &ov).unwrap();
        let s = PlannerSettings::from_table(&t).unwrap();
        assert_eq!(s.train.epochs, 7);
        assert_eq!(s.astar.cell_size, 0.5);
        assert_eq!(s.kinorrt, RrtConfig::default());
    }

    #[test]
    fn unknown_and_invalid_keys_are_rejected() {
        let t = parse_document(bundled::STANDARD, &[("train.epoch".into(), "7".into())]).unwrap();
        assert!(PlannerSettings::from_table(&t).is_err());
        let t = parse_document(bundled::STANDARD, &[("kinorrt.goal_bias".into(), "2".into())]).unwrap();
        assert!(PlannerSettings::from_table(&t).is_err());
    }

    #[test]
    fn seed_reaches_every_planner() {
        let s = PlannerSettings::default().with_seed(7);
        assert_eq!((s.pinn.seed, s.train.seed, s.kinorrt.seed), (7, 7, 7));
    }
}
