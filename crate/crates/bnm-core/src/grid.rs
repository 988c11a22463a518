//! Ground-truth environment, robot kinematics, observation and budget
//! accounting for a 4-connected rectangular grid.
//!
//! Row 0 is the top of the field: `North` decreases `y`, `South` increases
//! it. Sensing is noiseless and binary, and every visited cell is observed,
//! so a 100x100 field is fully inspectable with a budget of 10000 moves.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A grid coordinate. Out-of-bounds cells are representable so that
/// neighbor queries at the field boundary stay total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    /// The neighboring cell one step in `dir` (may be out of bounds).
    pub fn step(self, dir: Direction) -> Cell {
        let (dx, dy) = dir.delta();
        Cell::new(self.x + dx, self.y + dy)
    }

    pub fn manhattan(self, other: Cell) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// The four grid moves. The discriminants are the wire encoding used by the
/// inspection state vector (`s[5]`) and the policy table column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Direction {
    North = 0,
    East = 1,
    South = 2,
    West = 3,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    pub const fn code(self) -> u8 {
        self as u8
    }

    pub const fn from_code(code: u8) -> Option<Direction> {
        match code {
            0 => Some(Direction::North),
            1 => Some(Direction::East),
            2 => Some(Direction::South),
            3 => Some(Direction::West),
            _ => None,
        }
    }

    pub const fn delta(self) -> (i32, i32) {
        match self {
            Direction::North => (0, -1),
            Direction::East => (1, 0),
            Direction::South => (0, 1),
            Direction::West => (-1, 0),
        }
    }

    pub const fn opposite(self) -> Direction {
        match self {
            Direction::North => Direction::South,
            Direction::East => Direction::West,
            Direction::South => Direction::North,
            Direction::West => Direction::East,
        }
    }

    pub const fn is_horizontal(self) -> bool {
        matches!(self, Direction::East | Direction::West)
    }
}

/// Horizontal sweep direction; the wire encoding matches `s[7]`
/// (0 = East, 1 = West).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum HorizDir {
    East = 0,
    West = 1,
}

impl HorizDir {
    pub const fn code(self) -> u8 {
        self as u8
    }

    pub const fn from_code(code: u8) -> Option<HorizDir> {
        match code {
            0 => Some(HorizDir::East),
            1 => Some(HorizDir::West),
            _ => None,
        }
    }

    pub const fn direction(self) -> Direction {
        match self {
            HorizDir::East => Direction::East,
            HorizDir::West => Direction::West,
        }
    }

    pub const fn reversed(self) -> HorizDir {
        match self {
            HorizDir::East => HorizDir::West,
            HorizDir::West => HorizDir::East,
        }
    }

    pub const fn from_direction(dir: Direction) -> Option<HorizDir> {
        match dir {
            Direction::East => Some(HorizDir::East),
            Direction::West => Some(HorizDir::West),
            _ => None,
        }
    }
}

/// What the sensor reports at a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObsValue {
    NoAnomaly,
    Anomaly,
}

impl ObsValue {
    pub const fn is_anomaly(self) -> bool {
        matches!(self, ObsValue::Anomaly)
    }

    pub const fn label(self) -> u8 {
        match self {
            ObsValue::NoAnomaly => 0,
            ObsValue::Anomaly => 1,
        }
    }
}

/// One trajectory entry: the sensor reading taken at `cell` at `timestep`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    pub cell: Cell,
    pub value: ObsValue,
    pub timestep: u32,
}

/// Errors from map construction and queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridError {
    /// Width or height of zero, or other degenerate parameters.
    InvalidDimensions,
    /// Cluster growth was requested with zero accretion steps.
    InvalidClusterSize,
    OutOfBounds(Cell),
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::InvalidDimensions => write!(f, "grid dimensions must be at least 1x1"),
            GridError::InvalidClusterSize => write!(f, "cluster size must be at least 1"),
            GridError::OutOfBounds(c) => write!(f, "cell {c} is out of the area"),
        }
    }
}

impl core::error::Error for GridError {}

/// Errors from advancing the robot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepError {
    BudgetExhausted,
    OffGrid(Cell),
}

impl fmt::Display for StepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepError::BudgetExhausted => write!(f, "exploration budget exhausted"),
            StepError::OffGrid(c) => write!(f, "move would leave the grid at {c}"),
        }
    }
}

impl core::error::Error for StepError {}

/// Immutable ground-truth anomaly field over a `width x height` lattice.
/// Labels are 0 (no anomaly) or 1 (anomaly).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: u32,
    height: u32,
    values: Vec<u8>,
}

impl GridMap {
    /// An all-clear map.
    pub fn empty(width: u32, height: u32) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::InvalidDimensions);
        }
        Ok(Self {
            width,
            height,
            values: vec![0; (width as usize) * (height as usize)],
        })
    }

    /// Builds a map from row-major labels; every label must be 0 or 1.
    pub fn from_labels(width: u32, height: u32, values: Vec<u8>) -> Result<Self, GridError> {
        if width == 0 || height == 0 || values.len() != (width as usize) * (height as usize) {
            return Err(GridError::InvalidDimensions);
        }
        if values.iter().any(|&v| v > 1) {
            return Err(GridError::InvalidDimensions);
        }
        Ok(Self { width, height, values })
    }

    /// Grows `n_clusters` connected anomaly blobs, each by a seeded random
    /// walk of `cluster_size` accretion steps from a uniformly sampled
    /// center. Walk steps that would leave the grid are skipped, so every
    /// blob is 4-connected; blobs may merge. Deterministic in `seed`.
    pub fn generate_clustered(
        width: u32,
        height: u32,
        n_clusters: u32,
        cluster_size: u32,
        seed: u64,
    ) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::InvalidDimensions);
        }
        if cluster_size == 0 {
            return Err(GridError::InvalidClusterSize);
        }
        let mut map = Self::empty(width, height)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centers: Vec<Cell> = (0..n_clusters)
            .map(|_| {
                Cell::new(
                    rng.gen_range(0..width) as i32,
                    rng.gen_range(0..height) as i32,
                )
            })
            .collect();
        for center in centers {
            let mut walker = center;
            map.set(walker, 1);
            for _ in 0..cluster_size {
                let dir = Direction::from_code(rng.gen_range(0..4u8)).unwrap();
                let next = walker.step(dir);
                if map.in_bounds(next) {
                    walker = next;
                }
                map.set(walker, 1);
            }
        }
        Ok(map)
    }

    fn set(&mut self, cell: Cell, label: u8) {
        let idx = self.index(cell).expect("set out of bounds");
        self.values[idx] = label;
    }

    fn index(&self, cell: Cell) -> Option<usize> {
        if self.in_bounds(cell) {
            Some(cell.y as usize * self.width as usize + cell.x as usize)
        } else {
            None
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn cell_count(&self) -> u32 {
        self.width * self.height
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.x >= 0 && cell.y >= 0 && (cell.x as u32) < self.width && (cell.y as u32) < self.height
    }

    pub fn label(&self, cell: Cell) -> Option<u8> {
        self.index(cell).map(|i| self.values[i])
    }

    /// Row-major labels, row 0 first.
    pub fn labels(&self) -> &[u8] {
        &self.values
    }

    pub fn anomaly_count(&self) -> u32 {
        self.values.iter().map(|&v| v as u32).sum()
    }

    /// Iterates over all anomaly cells in row-major order.
    pub fn anomaly_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.values.iter().enumerate().filter_map(|(i, &v)| {
            (v == 1).then(|| {
                Cell::new(
                    (i % self.width as usize) as i32,
                    (i / self.width as usize) as i32,
                )
            })
        })
    }

    /// The noiseless sensor reading at `cell` (pure query).
    pub fn observe(&self, cell: Cell) -> Result<ObsValue, GridError> {
        match self.label(cell) {
            Some(1) => Ok(ObsValue::Anomaly),
            Some(_) => Ok(ObsValue::NoAnomaly),
            None => Err(GridError::OutOfBounds(cell)),
        }
    }
}

/// Which controller regime produced a timestep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Boustrophedon,
    CloseInspection,
}

impl Mode {
    /// Single-letter trace encoding.
    pub const fn letter(self) -> char {
        match self {
            Mode::Boustrophedon => 'B',
            Mode::CloseInspection => 'C',
        }
    }
}

/// The robot's run state: position, path to-date and budget ledger.
///
/// The initial cell is observed at timestep 0; every move costs one budget
/// unit and appends one observation, so `trajectory.len() == moves + 1`.
#[derive(Debug, Clone)]
pub struct RobotRun {
    position: Cell,
    trajectory: Vec<Observation>,
    b_total: u32,
    b_remain: u32,
    pub mode: Mode,
    width: u32,
    // Timestep at which each cell was first visited; u32::MAX = never.
    first_visit: Vec<u32>,
    visit_counts: Vec<u32>,
}

impl RobotRun {
    pub fn start(map: &GridMap, start: Cell, b_total: u32) -> Result<Self, GridError> {
        let value = map.observe(start)?;
        let cells = map.cell_count() as usize;
        let mut run = Self {
            position: start,
            trajectory: Vec::with_capacity(b_total as usize + 1),
            b_total,
            b_remain: b_total,
            mode: Mode::Boustrophedon,
            width: map.width(),
            first_visit: vec![u32::MAX; cells],
            visit_counts: vec![0; cells],
        };
        run.record(start, value);
        Ok(run)
    }

    fn cell_idx(&self, cell: Cell) -> usize {
        cell.y as usize * self.width as usize + cell.x as usize
    }

    fn record(&mut self, cell: Cell, value: ObsValue) {
        let t = self.trajectory.len() as u32;
        let idx = self.cell_idx(cell);
        if self.first_visit[idx] == u32::MAX {
            self.first_visit[idx] = t;
        }
        self.visit_counts[idx] += 1;
        self.trajectory.push(Observation { cell, value, timestep: t });
    }

    /// Moves one cell in `action`, spends one budget unit and observes the
    /// destination. Callers filter off-grid moves with `valid_actions`.
    pub fn step(&mut self, map: &GridMap, action: Direction) -> Result<Observation, StepError> {
        if self.b_remain == 0 {
            return Err(StepError::BudgetExhausted);
        }
        let dest = self.position.step(action);
        let value = map.observe(dest).map_err(|_| StepError::OffGrid(dest))?;
        self.b_remain -= 1;
        self.position = dest;
        self.record(dest, value);
        Ok(*self.trajectory.last().unwrap())
    }

    pub fn position(&self) -> Cell {
        self.position
    }

    pub fn trajectory(&self) -> &[Observation] {
        &self.trajectory
    }

    pub fn last_observation(&self) -> &Observation {
        self.trajectory.last().unwrap()
    }

    pub fn b_total(&self) -> u32 {
        self.b_total
    }

    pub fn b_remain(&self) -> u32 {
        self.b_remain
    }

    pub fn moves_taken(&self) -> u32 {
        self.b_total - self.b_remain
    }

    pub fn visit_count(&self, cell: Cell) -> u32 {
        self.visit_counts[self.cell_idx(cell)]
    }

    /// Whether trajectory entry `idx` was the first visit of its cell and
    /// observed an anomaly.
    pub fn is_new_anomaly(&self, idx: usize) -> bool {
        let obs = &self.trajectory[idx];
        obs.value.is_anomaly() && self.first_visit[self.cell_idx(obs.cell)] == obs.timestep
    }

    pub fn distinct_cells_visited(&self) -> u32 {
        self.visit_counts.iter().filter(|&&c| c > 0).count() as u32
    }
}

/// The subset of the four moves whose destination stays on the grid.
pub fn valid_actions(position: Cell, width: u32, height: u32) -> Vec<Direction> {
    Direction::ALL
        .iter()
        .copied()
        .filter(|d| {
            let c = position.step(*d);
            c.x >= 0 && c.y >= 0 && (c.x as u32) < width && (c.y as u32) < height
        })
        .collect()
}
