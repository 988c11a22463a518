//! Tabular Q-learning of the close-inspection policy over the enumerable
//! state space.
//!
//! The table is exact (73728 states x 4 actions), so no function
//! approximation is involved; training alternates episodes between two
//! start cells on the edges of the anomaly region, one cycle per task,
//! and evaluates both tasks greedily at the end of each cycle.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::controller::novelty_window_clear;
use crate::grid::{valid_actions, Cell, Direction, GridMap, HorizDir};
use crate::mdp::{
    decode_state, state_index, BeliefGrid, CellKnowledge, CurrentCell, InspectionCursor,
    InspectionState, ACTION_COUNT, STATE_COUNT,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LearnError {
    /// Hyperparameters outside their valid ranges.
    InvalidHyperparams(&'static str),
    /// Zero cycles or zero steps per cycle.
    InvalidSchedule,
    /// Training requires at least one anomaly cell on the map.
    AnomalyFreeMap,
    /// State or action index outside the table.
    IndexOutOfRange,
    /// An update produced or received a non-finite value.
    NonFinite,
    /// A loaded table had the wrong number of entries.
    BadTableSize { expected: usize, got: usize },
}

impl fmt::Display for LearnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LearnError::InvalidHyperparams(what) => write!(f, "invalid hyperparameter: {what}"),
            LearnError::InvalidSchedule => {
                write!(f, "training schedule needs at least one cycle and one step")
            }
            LearnError::AnomalyFreeMap => {
                write!(f, "training map contains no anomaly cells")
            }
            LearnError::IndexOutOfRange => write!(f, "state or action index out of range"),
            LearnError::NonFinite => write!(f, "non-finite value in Q update"),
            LearnError::BadTableSize { expected, got } => {
                write!(f, "expected {expected} table values, got {got}")
            }
        }
    }
}

impl core::error::Error for LearnError {}

/// Provenance carried with a trained table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PolicyMeta {
    pub seed: u64,
    pub steps_trained: u64,
}

/// The close-inspection policy: a dense action-value table with a fixed
/// greedy tie-break (lowest action code).
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    q: Vec<f64>,
    pub version: u32,
    pub meta: PolicyMeta,
}

impl Policy {
    pub fn zeros(meta: PolicyMeta) -> Self {
        Self { q: vec![0.0; STATE_COUNT * ACTION_COUNT], version: 1, meta }
    }

    /// Wraps a raw row-major table (state rows, action columns).
    pub fn from_table(q: Vec<f64>, meta: PolicyMeta) -> Result<Self, LearnError> {
        if q.len() != STATE_COUNT * ACTION_COUNT {
            return Err(LearnError::BadTableSize {
                expected: STATE_COUNT * ACTION_COUNT,
                got: q.len(),
            });
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(LearnError::NonFinite);
        }
        Ok(Self { q, version: 1, meta })
    }

    pub fn table(&self) -> &[f64] {
        &self.q
    }

    pub fn q(&self, state: usize, action: Direction) -> f64 {
        self.q[state * ACTION_COUNT + action.code() as usize]
    }

    fn set_q(&mut self, state: usize, action: Direction, value: f64) {
        self.q[state * ACTION_COUNT + action.code() as usize] = value;
    }

    /// Actions that stay on the grid from this state: the encoded neighbor
    /// knowledge marks off-grid directions as out-of-area.
    fn admissible(state: &InspectionState) -> impl Iterator<Item = Direction> + '_ {
        Direction::ALL
            .into_iter()
            .filter(|a| state.neighbors[a.code() as usize] != CellKnowledge::OutOfArea)
    }

    /// Greedy action, ties broken toward the lowest action code. Falls
    /// back to North when no action is admissible (degenerate 1x1 grid).
    pub fn greedy(&self, state: usize) -> Direction {
        let decoded = decode_state(state);
        let mut best: Option<(Direction, f64)> = None;
        for action in Self::admissible(&decoded) {
            let v = self.q(state, action);
            match best {
                Some((_, bv)) if v <= bv => {}
                _ => best = Some((action, v)),
            }
        }
        best.map(|(a, _)| a).unwrap_or(Direction::North)
    }

    /// Highest admissible action value of a state; 0 when none is.
    pub fn max_q(&self, state: usize) -> f64 {
        let decoded = decode_state(state);
        let mut best: Option<f64> = None;
        for action in Self::admissible(&decoded) {
            let v = self.q(state, action);
            best = Some(match best {
                Some(b) if b >= v => b,
                _ => v,
            });
        }
        best.unwrap_or(0.0)
    }
}

/// Learning-rate, discount, exploration schedule and episode limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub alpha: f64,
    pub gamma: f64,
    pub eps_start: f64,
    pub eps_end: f64,
    /// Fraction of total steps over which epsilon decays linearly.
    pub eps_decay_fraction: f64,
    pub episode_cap: u32,
    /// Novelty allowance for episode termination.
    pub novelty_allowance: u32,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            gamma: 0.99,
            eps_start: 1.0,
            eps_end: 0.05,
            eps_decay_fraction: 0.8,
            episode_cap: 400,
            novelty_allowance: 10,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), LearnError> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(LearnError::InvalidHyperparams("alpha must be in (0, 1]"));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(LearnError::InvalidHyperparams("gamma must be in [0, 1)"));
        }
        for eps in [self.eps_start, self.eps_end] {
            if !(0.0..=1.0).contains(&eps) {
                return Err(LearnError::InvalidHyperparams("epsilon must be in [0, 1]"));
            }
        }
        if !(0.0..=1.0).contains(&self.eps_decay_fraction) {
            return Err(LearnError::InvalidHyperparams(
                "eps_decay_fraction must be in [0, 1]",
            ));
        }
        if self.episode_cap == 0 {
            return Err(LearnError::InvalidHyperparams("episode_cap must be positive"));
        }
        if self.novelty_allowance == 0 {
            return Err(LearnError::InvalidHyperparams(
                "novelty_allowance must be positive",
            ));
        }
        Ok(())
    }

    fn epsilon_at(&self, step: u64, total_steps: u64) -> f64 {
        let horizon = total_steps as f64 * self.eps_decay_fraction;
        if horizon <= 0.0 || step as f64 >= horizon {
            return self.eps_end;
        }
        self.eps_start + (self.eps_end - self.eps_start) * (step as f64 / horizon)
    }
}

/// Alternating two-task curriculum: odd cycles start at the left edge of
/// the anomaly region, even cycles at the right edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainSchedule {
    pub cycles: u32,
    pub steps_per_cycle: u64,
}

impl TrainSchedule {
    pub fn validate(&self) -> Result<(), LearnError> {
        if self.cycles == 0 || self.steps_per_cycle == 0 {
            return Err(LearnError::InvalidSchedule);
        }
        Ok(())
    }
}

/// An episode start cell paired with the move that notionally brought the
/// robot there (which also sets the initial grazing direction).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskStart {
    pub cell: Cell,
    pub approach: Direction,
}

/// The two curriculum starts: task 1 on the right edge of the anomaly
/// region (entered moving West), task 2 on the left edge (entered moving
/// East). Ties on the edge break toward the lowest row.
pub fn task_starts(map: &GridMap) -> Option<(TaskStart, TaskStart)> {
    let mut right: Option<Cell> = None;
    let mut left: Option<Cell> = None;
    for cell in map.anomaly_cells() {
        right = Some(match right {
            Some(r) if r.x > cell.x || (r.x == cell.x && r.y <= cell.y) => r,
            _ => cell,
        });
        left = Some(match left {
            Some(l) if l.x < cell.x || (l.x == cell.x && l.y <= cell.y) => l,
            _ => cell,
        });
    }
    Some((
        TaskStart { cell: right?, approach: Direction::West },
        TaskStart { cell: left?, approach: Direction::East },
    ))
}

/// Greedy (or scripted) rollout metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalMetrics {
    /// Distinct anomaly cells first-visited during the episode, the start
    /// cell included.
    pub anomalies_found: u32,
    pub cumulative_reward: i64,
    pub steps: u32,
}

/// Post-cycle evaluation of both curriculum tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalReport {
    pub cycle: u32,
    pub task1: EvalMetrics,
    pub task2: EvalMetrics,
}

/// A self-contained inspection episode on a fresh belief grid; shared by
/// training, evaluation and the random baseline.
struct InspectionSim<'m> {
    map: &'m GridMap,
    belief: BeliefGrid,
    position: Cell,
    cursor: InspectionCursor,
    state: InspectionState,
    new_anomaly: Vec<bool>,
    metrics: EvalMetrics,
}

impl<'m> InspectionSim<'m> {
    fn start(map: &'m GridMap, task: TaskStart) -> Self {
        let mut belief = BeliefGrid::new(map.width(), map.height());
        // The cell the robot notionally came from was observed on the way in.
        let origin = task.cell.step(task.approach.opposite());
        if let Ok(value) = map.observe(origin) {
            belief.record_visit(origin, value.is_anomaly());
        }
        let anomalous = map
            .observe(task.cell)
            .expect("task start must be in bounds")
            .is_anomaly();
        belief.record_visit(task.cell, anomalous);
        let entry_dir = HorizDir::from_direction(task.approach).unwrap_or(HorizDir::East);
        let cursor = InspectionCursor::enter(task.approach, entry_dir);
        let state = cursor.state(&belief, task.cell);
        let fresh_anomaly = state.current == CurrentCell::FreshAnomalous;
        Self {
            map,
            belief,
            position: task.cell,
            cursor,
            state,
            new_anomaly: vec![fresh_anomaly],
            metrics: EvalMetrics {
                anomalies_found: fresh_anomaly as u32,
                ..EvalMetrics::default()
            },
        }
    }

    fn valid(&self) -> Vec<Direction> {
        valid_actions(self.position, self.map.width(), self.map.height())
    }

    fn terminated(&self, allowance: u32) -> bool {
        novelty_window_clear(&self.new_anomaly, allowance)
    }

    /// Executes one (in-bounds) move; returns the reward and the new state
    /// index.
    fn step(&mut self, action: Direction) -> (i32, usize) {
        let dest = self.position.step(action);
        let value = self.map.observe(dest).expect("moves are pre-filtered");
        self.belief.record_visit(dest, value.is_anomaly());
        let prev_state = self.state;
        let new_state = self.cursor.advance(&self.belief, dest, action);
        self.position = dest;
        self.state = new_state;
        let fresh_anomaly = new_state.current == CurrentCell::FreshAnomalous;
        self.new_anomaly.push(fresh_anomaly);
        self.metrics.anomalies_found += fresh_anomaly as u32;
        let r = crate::mdp::reward(&prev_state, &new_state);
        self.metrics.cumulative_reward += r as i64;
        self.metrics.steps += 1;
        (r, state_index(&new_state))
    }
}

/// One temporal-difference backup:
/// `q(s,a) += alpha * (r + gamma * max_a' q(s',a') * [not terminal] - q(s,a))`.
pub fn q_update(
    policy: &mut Policy,
    state: usize,
    action: Direction,
    r: f64,
    next_state: usize,
    terminal: bool,
    hp: &Hyperparams,
) -> Result<(), LearnError> {
    if state >= STATE_COUNT || next_state >= STATE_COUNT {
        return Err(LearnError::IndexOutOfRange);
    }
    if !r.is_finite() {
        return Err(LearnError::NonFinite);
    }
    let bootstrap = if terminal { 0.0 } else { hp.gamma * policy.max_q(next_state) };
    let old = policy.q(state, action);
    let updated = old + hp.alpha * (r + bootstrap - old);
    if !updated.is_finite() {
        return Err(LearnError::NonFinite);
    }
    policy.set_q(state, action, updated);
    Ok(())
}

/// Trains the close-inspection policy with epsilon-greedy episodes under
/// the alternating curriculum; fully deterministic in `seed`.
///
/// Episodes end on the novelty-allowance condition or the episode cap;
/// cycles cut at exactly `steps_per_cycle` learning steps. After each
/// cycle both task starts are evaluated greedily.
pub fn train(
    map: &GridMap,
    schedule: TrainSchedule,
    hp: &Hyperparams,
    seed: u64,
) -> Result<(Policy, Vec<EvalReport>), LearnError> {
    hp.validate()?;
    schedule.validate()?;
    let (task1, task2) = task_starts(map).ok_or(LearnError::AnomalyFreeMap)?;
    let mut policy = Policy::zeros(PolicyMeta { seed, steps_trained: 0 });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total_steps = schedule.cycles as u64 * schedule.steps_per_cycle;
    let mut global_step: u64 = 0;
    let mut reports = Vec::with_capacity(schedule.cycles as usize);
    for cycle in 0..schedule.cycles {
        let task = if cycle % 2 == 0 { task1 } else { task2 };
        let mut cycle_steps: u64 = 0;
        'episodes: while cycle_steps < schedule.steps_per_cycle {
            let mut sim = InspectionSim::start(map, task);
            let mut s_idx = state_index(&sim.state);
            let mut episode_steps: u32 = 0;
            loop {
                if cycle_steps >= schedule.steps_per_cycle {
                    continue 'episodes;
                }
                let valid = sim.valid();
                if valid.is_empty() {
                    break;
                }
                let eps = hp.epsilon_at(global_step, total_steps);
                let action = if rng.gen::<f64>() < eps {
                    valid[rng.gen_range(0..valid.len())]
                } else {
                    policy.greedy(s_idx)
                };
                let (r, next_idx) = sim.step(action);
                let terminal = sim.terminated(hp.novelty_allowance);
                q_update(&mut policy, s_idx, action, r as f64, next_idx, terminal, hp)?;
                global_step += 1;
                cycle_steps += 1;
                episode_steps += 1;
                s_idx = next_idx;
                if terminal || episode_steps >= hp.episode_cap {
                    break;
                }
            }
        }
        reports.push(EvalReport {
            cycle,
            task1: evaluate(
                &policy,
                map,
                task1.cell,
                HorizDir::from_direction(task1.approach).unwrap_or(HorizDir::East),
                hp.episode_cap,
                hp.novelty_allowance,
            ),
            task2: evaluate(
                &policy,
                map,
                task2.cell,
                HorizDir::from_direction(task2.approach).unwrap_or(HorizDir::East),
                hp.episode_cap,
                hp.novelty_allowance,
            ),
        });
    }
    policy.meta.steps_trained = global_step;
    Ok((policy, reports))
}

/// Greedy rollout from `start`, entering in `entry_dir`; side-effect free
/// on the policy.
pub fn evaluate(
    policy: &Policy,
    map: &GridMap,
    start: Cell,
    entry_dir: HorizDir,
    cap: u32,
    novelty_allowance: u32,
) -> EvalMetrics {
    let task = TaskStart { cell: start, approach: entry_dir.direction() };
    let mut sim = InspectionSim::start(map, task);
    while sim.metrics.steps < cap && !sim.terminated(novelty_allowance) {
        if sim.valid().is_empty() {
            break;
        }
        let action = policy.greedy(state_index(&sim.state));
        sim.step(action);
    }
    sim.metrics
}

/// Uniform-random rollout from `start`; the reference baseline that
/// trained policies are measured against.
pub fn random_policy_rollout<R: Rng>(
    map: &GridMap,
    start: Cell,
    entry_dir: HorizDir,
    cap: u32,
    novelty_allowance: u32,
    rng: &mut R,
) -> EvalMetrics {
    let task = TaskStart { cell: start, approach: entry_dir.direction() };
    let mut sim = InspectionSim::start(map, task);
    while sim.metrics.steps < cap && !sim.terminated(novelty_allowance) {
        let valid = sim.valid();
        if valid.is_empty() {
            break;
        }
        sim.step(valid[rng.gen_range(0..valid.len())]);
    }
    sim.metrics
}
