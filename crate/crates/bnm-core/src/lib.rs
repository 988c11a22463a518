//! Budget-constrained exploration of grid worlds with clustered anomalies.
//!
//! A robot with a hard move budget sweeps a rectangular field in a
//! boustrophedon (серpentine) pattern and, whenever it steps onto a
//! previously unseen anomaly, switches into a close-inspection mode driven
//! by a learned policy that "grazes" the anomaly cluster column by column.
//! When no new anomaly has been seen for a configurable number of steps the
//! robot replans a serpentine over the remaining rows and resumes sweeping.
//!
//! The crate is split into:
//!
//! - [`grid`]: the ground-truth map, robot kinematics and budget ledger
//! - [`coverage`]: budget-aware serpentine path planning
//! - [`mdp`]: the 8-integer close-inspection state encoding, sequence-phase
//!   automaton and reward function
//! - [`learner`]: tabular Q-learning over the enumerable inspection state
//!   space, with an alternating two-start curriculum
//! - [`controller`]: the mode-switching controller and episode runner
//! - [`estimator`]: world-model reconstruction from observations and the
//!   asymmetric score
//! - [`baselines`]: full-budget boustrophedon and random-waypoint reference
//!   runs
//!
//! Everything in here is deterministic given its inputs; all randomness is
//! injected through explicit seeds (see [`seeds`]).
//!
//! The crate is `no_std` + `alloc`; file formats and the command-line
//! front end live in the companion `bnm-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod baselines;
pub mod controller;
pub mod coverage;
pub mod estimator;
pub mod grid;
pub mod learner;
pub mod mdp;
pub mod seeds;

pub use controller::{run_episode, Algorithm, ControllerConfig, RunRecord};
pub use grid::{Cell, Direction, GridMap, HorizDir, Mode, ObsValue, Observation, RobotRun};
pub use learner::Policy;
