//! Automatic differentiation and the sine-activated network used by the
//! physics-informed planner.

pub mod adam;
pub mod checkpoint;
pub mod jet;
pub mod mlp;
pub mod tape;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use jet::{Real, TimeJet};
pub use mlp::{batch_backward, batch_forward, forward, forward_with_dt, init_params, BatchEval, InitScheme, MlpConfig, ParamVector};
pub use tape::{ParamTape, Var};
