//! Sample compression schemes on finite concept classes, with reductions
//! from multiclass, regression and adversarially robust learning to binary
//! compression, exhaustive dimension oracles, and a verification harness.

pub mod bits;
pub mod bitset;
pub mod concepts;
pub mod dimensions;
pub mod error;
pub mod harness;
pub mod rational;
pub mod reductions;
pub mod schemes;
pub mod verify;

pub use concepts::{ConceptClass, FiniteDomain, Label, LabelSpace, LabeledSample, Loss, LossValue, Predictor, PredictorKind};
pub use error::{Error, Result};
pub use rational::Rational;
