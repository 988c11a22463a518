//! The mode-switching controller: follows the planned serpentine, fires
//! close inspection on first-visit anomalies, runs the learned policy until
//! the novelty allowance runs dry, then replans coverage of the rows that
//! remain.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::baselines;
use crate::coverage::{estimate_close_inspect_reserve, plan_remaining, BudgetLedger};
use crate::grid::{Cell, Direction, GridError, GridMap, HorizDir, Observation, RobotRun};
use crate::learner::Policy;
use crate::mdp::{state_index, BeliefGrid, InspectionCursor};

pub use crate::grid::Mode;

/// The three episode drivers of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Bnm,
    Boustrophedon,
    RandomWaypoint,
}

impl Algorithm {
    pub const fn name(self) -> &'static str {
        match self {
            Algorithm::Bnm => "bnm",
            Algorithm::Boustrophedon => "boustrophedon",
            Algorithm::RandomWaypoint => "random",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunError {
    /// The BNM controller needs a close-inspection policy.
    MissingPolicy,
    /// Novelty allowance of zero or a reserve fraction outside [0, 1).
    InvalidConfig(&'static str),
    Grid(GridError),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::MissingPolicy => write!(f, "bnm requires a close-inspection policy"),
            RunError::InvalidConfig(what) => write!(f, "invalid controller config: {what}"),
            RunError::Grid(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for RunError {}

/// Controller parameters; the defaults are the benchmark defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    /// Steps without a newly discovered anomaly cell that end close
    /// inspection.
    pub novelty_allowance: u32,
    /// Fraction of the remaining budget withheld from each coverage plan
    /// for future close inspection.
    pub reserve_fraction: f64,
    pub start: Cell,
    pub initial_dir: HorizDir,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            novelty_allowance: 10,
            reserve_fraction: 0.25,
            start: Cell::new(0, 0),
            initial_dir: HorizDir::East,
        }
    }
}

impl ControllerConfig {
    fn validate(&self) -> Result<(), RunError> {
        if self.novelty_allowance == 0 {
            return Err(RunError::InvalidConfig("novelty allowance must be positive"));
        }
        if !(0.0..1.0).contains(&self.reserve_fraction) {
            return Err(RunError::InvalidConfig("reserve fraction must be in [0, 1)"));
        }
        Ok(())
    }
}

/// One finished episode: the observation log with per-timestep mode labels.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub b_total: u32,
    pub width: u32,
    pub height: u32,
    pub trajectory: Vec<Observation>,
    pub modes: Vec<Mode>,
}

impl RunRecord {
    /// Number of timesteps (observations), moves + 1.
    pub fn len(&self) -> usize {
        self.trajectory.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectory.is_empty()
    }

    pub fn moves_taken(&self) -> u32 {
        self.trajectory.len() as u32 - 1
    }

    pub fn distinct_cells_visited(&self) -> u32 {
        let mut seen = vec![false; self.width as usize * self.height as usize];
        let mut count = 0;
        for obs in &self.trajectory {
            let idx = obs.cell.y as usize * self.width as usize + obs.cell.x as usize;
            if !seen[idx] {
                seen[idx] = true;
                count += 1;
            }
        }
        count
    }

    pub fn coverage_percent(&self) -> f64 {
        100.0 * self.distinct_cells_visited() as f64
            / (self.width as f64 * self.height as f64)
    }

    /// Distinct anomaly cells first-visited over the whole run.
    pub fn anomalies_found(&self) -> u32 {
        let mut seen = vec![false; self.width as usize * self.height as usize];
        let mut count = 0;
        for obs in &self.trajectory {
            let idx = obs.cell.y as usize * self.width as usize + obs.cell.x as usize;
            if !seen[idx] {
                seen[idx] = true;
                count += obs.value.is_anomaly() as u32;
            }
        }
        count
    }
}

/// Whether the just-taken observation initiates close inspection: an
/// anomaly at a cell whose only visit so far is this one.
pub fn should_initiate(run: &RobotRun) -> bool {
    let obs = run.last_observation();
    obs.value.is_anomaly() && run.visit_count(obs.cell) == 1
}

/// Whether close inspection should end: none of the most recent
/// `novelty_allowance + 1` observations (window clamped at the trajectory
/// start) is a first-visit anomaly.
pub fn should_terminate(run: &RobotRun, novelty_allowance: u32) -> bool {
    let n = run.trajectory().len();
    let window = (novelty_allowance as usize + 1).min(n);
    (n - window..n).all(|i| !run.is_new_anomaly(i))
}

/// Window test over a per-observation new-anomaly flag log; mirrors
/// [`should_terminate`] for episode simulators that do not carry a
/// [`RobotRun`].
pub(crate) fn novelty_window_clear(new_anomaly: &[bool], novelty_allowance: u32) -> bool {
    new_anomaly
        .iter()
        .rev()
        .take(novelty_allowance as usize + 1)
        .all(|&flag| !flag)
}

/// Why a stepped episode stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndReason {
    BudgetExhausted,
    PlanComplete,
}

/// Result of one controller step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Moved,
    Finished(EndReason),
}

/// The live BNM controller driving one run.
pub struct BnmController<'p> {
    config: ControllerConfig,
    policy: &'p Policy,
    belief: BeliefGrid,
    mode: Mode,
    /// Remaining waypoint targets (approach legs + serpentine).
    route: Vec<Cell>,
    next_wp: usize,
    /// Start of the segment currently being walked.
    segment_start: Cell,
    /// Most recent horizontal move direction; selects the replan corner.
    last_horizontal: HorizDir,
    cursor: Option<InspectionCursor>,
    /// Largest row index fully swept by a completed full-width pass.
    highest_swept: i32,
    width: u32,
    height: u32,
}

impl<'p> BnmController<'p> {
    pub fn new(map: &GridMap, policy: &'p Policy, config: ControllerConfig) -> Result<Self, RunError> {
        config.validate()?;
        Ok(Self {
            config,
            policy,
            belief: BeliefGrid::new(map.width(), map.height()),
            mode: Mode::Boustrophedon,
            route: Vec::new(),
            next_wp: 0,
            segment_start: config.start,
            last_horizontal: config.initial_dir,
            cursor: None,
            highest_swept: -1,
            width: map.width(),
            height: map.height(),
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn belief_mut(&mut self) -> &mut BeliefGrid {
        &mut self.belief
    }

    fn route_exhausted(&self) -> bool {
        self.next_wp >= self.route.len()
    }

    /// Plans coverage of the band of rows beyond the swept ones: approach
    /// legs to the band corner on the preserved sweep side, then the
    /// serpentine. Leaves the route empty when nothing feasible remains.
    fn replan(&mut self, run: &RobotRun) {
        self.route.clear();
        self.next_wp = 0;
        let position = run.position();
        self.segment_start = position;
        let band_start_y = position.y.max(self.highest_swept + 1);
        if band_start_y > self.height as i32 - 1 {
            return;
        }
        let reserve = estimate_close_inspect_reserve(run.b_remain(), self.config.reserve_fraction);
        let available = run.b_remain().saturating_sub(reserve);
        let corner_x = match self.last_horizontal {
            HorizDir::East => 0,
            HorizDir::West => self.width as i32 - 1,
        };
        let corner = Cell::new(corner_x, band_start_y);
        let approach_cost = position.manhattan(corner);
        if available < approach_cost {
            return;
        }
        let ledger = BudgetLedger::new(run.b_total(), available - approach_cost, 0);
        let plan = plan_remaining(corner, self.width, self.height, &ledger, self.last_horizontal);
        if plan.is_empty() {
            return;
        }
        // Approach horizontally first, then vertically, then the serpentine.
        let elbow = Cell::new(corner.x, position.y);
        for wp in [elbow, corner] {
            if self.route.last().copied().unwrap_or(position) != wp {
                self.route.push(wp);
            }
        }
        for wp in &plan.waypoints[1..] {
            self.route.push(*wp);
        }
    }

    fn direction_toward(from: Cell, to: Cell) -> Direction {
        if to.x > from.x {
            Direction::East
        } else if to.x < from.x {
            Direction::West
        } else if to.y > from.y {
            Direction::South
        } else {
            Direction::North
        }
    }

    /// Advances waypoint bookkeeping after a move; marks rows swept by
    /// completed full-width horizontal segments.
    fn note_arrivals(&mut self, position: Cell) {
        while self.next_wp < self.route.len() && position == self.route[self.next_wp] {
            let target = self.route[self.next_wp];
            let start = self.segment_start;
            if start.y == target.y {
                let (lo, hi) = (start.x.min(target.x), start.x.max(target.x));
                if lo == 0 && hi == self.width as i32 - 1 {
                    self.highest_swept = self.highest_swept.max(target.y);
                }
            }
            self.segment_start = target;
            self.next_wp += 1;
        }
    }

    /// One controller step: a single move in the current mode plus the
    /// transition checks. Budget exhaustion finishes the run cleanly in
    /// either mode.
    pub fn step(&mut self, run: &mut RobotRun, map: &GridMap) -> StepOutcome {
        if run.b_remain() == 0 {
            return StepOutcome::Finished(EndReason::BudgetExhausted);
        }
        match self.mode {
            Mode::Boustrophedon => {
                if self.route_exhausted() {
                    self.replan(run);
                    if self.route_exhausted() {
                        return StepOutcome::Finished(EndReason::PlanComplete);
                    }
                }
                let target = self.route[self.next_wp];
                let dir = Self::direction_toward(run.position(), target);
                let obs = run.step(map, dir).expect("planned moves stay on grid");
                self.belief.record_visit(obs.cell, obs.value.is_anomaly());
                if let Some(h) = HorizDir::from_direction(dir) {
                    self.last_horizontal = h;
                }
                self.note_arrivals(obs.cell);
                if should_initiate(run) {
                    self.mode = Mode::CloseInspection;
                    self.cursor = Some(InspectionCursor::enter(dir, self.last_horizontal));
                    self.route.clear();
                    self.next_wp = 0;
                }
            }
            Mode::CloseInspection => {
                let cursor = self.cursor.as_mut().expect("cursor present in inspection mode");
                let state = cursor.state(&self.belief, run.position());
                let action = self.policy.greedy(state_index(&state));
                let obs = run.step(map, action).expect("greedy action stays on grid");
                self.belief.record_visit(obs.cell, obs.value.is_anomaly());
                cursor.advance(&self.belief, obs.cell, action);
                if should_terminate(run, self.config.novelty_allowance) {
                    self.last_horizontal = cursor.entry_dir;
                    self.cursor = None;
                    self.mode = Mode::Boustrophedon;
                    self.replan(run);
                }
            }
        }
        run.mode = self.mode;
        StepOutcome::Moved
    }
}

/// Runs one full episode of the chosen algorithm until budget exhaustion
/// or plan completion.
pub fn run_episode(
    map: &GridMap,
    b_total: u32,
    algorithm: Algorithm,
    policy: Option<&Policy>,
    config: &ControllerConfig,
    seed: u64,
) -> Result<RunRecord, RunError> {
    match algorithm {
        Algorithm::Boustrophedon => Ok(baselines::boustrophedon_run(map, b_total)),
        Algorithm::RandomWaypoint => Ok(baselines::random_waypoint_run(map, b_total, seed)),
        Algorithm::Bnm => {
            let policy = policy.ok_or(RunError::MissingPolicy)?;
            let mut controller = BnmController::new(map, policy, *config)?;
            let mut run =
                RobotRun::start(map, config.start, b_total).map_err(RunError::Grid)?;
            controller
                .belief_mut()
                .record_visit(config.start, run.last_observation().value.is_anomaly());
            let mut modes = vec![Mode::Boustrophedon];
            while let StepOutcome::Moved = controller.step(&mut run, map) {
                modes.push(controller.mode());
            }
            Ok(RunRecord {
                algorithm: Algorithm::Bnm,
                b_total,
                width: map.width(),
                height: map.height(),
                trajectory: run.trajectory().to_vec(),
                modes,
            })
        }
    }
}
