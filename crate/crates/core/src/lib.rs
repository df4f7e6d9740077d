//! Unlearning sample inference game.
//!
//! A challenger trains on `R u F`, unlearns `F` and hands the model to an
//! adversary, which must tell forget points from test points via an oracle.
//! The adversary's advantage, averaged over splits, measures how much of `F`
//! remains in the model.

// `!(x > 0.0)` style checks are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversaries;
pub mod engine;
pub mod error;
pub mod game;
pub mod harness;
pub mod learners;
pub mod seed;
pub mod unlearners;

pub use adversaries::{Attack, CalibrationSet, StrongAdversary, WeakAdversary};
pub use engine::{
    certified_bound, exact_advantage, mc_advantage, split_advantage, swap_advantage, unlearning_quality,
    AdvantageReport, Adversary, BoundParams, Challenger, Estimator, GameContext, SplitAdvantage, UnlearningChallenger,
};
pub use error::{Error, ErrorRecord, Result};
pub use game::{Alpha, Bit, DataPoint, Dataset, Oracle, SensitivityDistribution, Split};
pub use learners::{LearnerKind, LearnerSpec, Model, TrainConfig};
pub use unlearners::{RemovalLedger, UnlearnerKind, UnlearnerSpec};
