//! The close-inspection decision process: the 8-integer state encoding,
//! the grazing sequence automaton and the reward function.
//!
//! The state vector `s` packs, in order: knowledge of the four neighbor
//! cells (N, E, S, W), the status of the robot's own cell, the last action,
//! the sequence phase and the horizontal grazing direction. The phase
//! automaton tracks adherence to the desirable pattern: vertical sweeps
//! through anomalous cells alternating with single lateral steps in the
//! grazing direction, which maps a cluster column by column. Any move
//! outside the pattern parks the phase at the off-pattern sentinel (12),
//! from which a pattern-matching move re-enters the automaton.

use alloc::vec::Vec;

use crate::grid::{Cell, Direction, HorizDir};

pub use crate::grid::valid_actions;

/// Number of distinct encodable states: 4^6 * 9 * 2.
pub const STATE_COUNT: usize = 73_728;

/// Number of actions in the policy table (the four grid moves).
pub const ACTION_COUNT: usize = 4;

/// What the agent knows about a cell (`s[0]..s[3]` encoding).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum CellKnowledge {
    Unvisited = 0,
    KnownClear = 1,
    KnownAnomalous = 2,
    OutOfArea = 3,
}

impl CellKnowledge {
    pub const fn code(self) -> u8 {
        self as u8
    }

    pub const fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(CellKnowledge::Unvisited),
            1 => Some(CellKnowledge::KnownClear),
            2 => Some(CellKnowledge::KnownAnomalous),
            3 => Some(CellKnowledge::OutOfArea),
            _ => None,
        }
    }
}

/// Status of the robot's own cell (`s[4]` encoding). Fresh variants mean
/// the current observation is the cell's first visit; "newly found
/// anomalous" holds for exactly that timestep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum CurrentCell {
    Revisited = 0,
    RevisitedAnomalous = 1,
    FreshClear = 2,
    FreshAnomalous = 3,
}

impl CurrentCell {
    pub const fn code(self) -> u8 {
        self as u8
    }

    pub const fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(CurrentCell::Revisited),
            1 => Some(CurrentCell::RevisitedAnomalous),
            2 => Some(CurrentCell::FreshClear),
            3 => Some(CurrentCell::FreshAnomalous),
            _ => None,
        }
    }

    /// First visit of the cell.
    pub const fn is_fresh(self) -> bool {
        matches!(self, CurrentCell::FreshClear | CurrentCell::FreshAnomalous)
    }

    pub const fn is_anomalous(self) -> bool {
        matches!(self, CurrentCell::RevisitedAnomalous | CurrentCell::FreshAnomalous)
    }
}

/// Sequence phase (`s[6]`). In-pattern ranks are 0..=8; off-pattern
/// displays the sentinel value 12 while carrying the last in-pattern rank,
/// which keeps indexing inside the 9-way radix slot and lets the automaton
/// re-enter where it left off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase {
    rank: u8,
    off_pattern: bool,
}

/// Phase displayed while off the desirable pattern.
pub const OFF_PATTERN: u8 = 12;

impl Phase {
    /// Inspection just initiated on a freshly found anomaly.
    pub const ENTRY: Phase = Phase::in_pattern(0);
    /// Moving north through anomalous cells.
    pub const ASCEND: Phase = Phase::in_pattern(1);
    /// A north move landed on a clear cell above the column.
    pub const TOP_EXIT: Phase = Phase::in_pattern(2);
    /// Single grazing-direction step taken at the top.
    pub const TOP_STEP: Phase = Phase::in_pattern(3);
    /// Moving south through anomalous cells.
    pub const DESCEND: Phase = Phase::in_pattern(4);
    /// A south move landed on a clear cell below the column.
    pub const BOTTOM_EXIT: Phase = Phase::in_pattern(5);
    /// Single grazing-direction step taken at the bottom.
    pub const BOTTOM_STEP: Phase = Phase::in_pattern(6);
    /// Moving north over clear cells toward the next column's anomalies.
    pub const ASCEND_SEEK: Phase = Phase::in_pattern(7);
    /// Moving south over clear cells toward the next column's anomalies.
    pub const DESCEND_SEEK: Phase = Phase::in_pattern(8);

    pub const fn in_pattern(rank: u8) -> Phase {
        assert!(rank <= 8);
        Phase { rank, off_pattern: false }
    }

    pub const fn off_pattern(last_rank: u8) -> Phase {
        assert!(last_rank <= 8);
        Phase { rank: last_rank, off_pattern: true }
    }

    /// The value the state vector displays: the rank, or 12 off-pattern.
    pub const fn value(self) -> u8 {
        if self.off_pattern {
            OFF_PATTERN
        } else {
            self.rank
        }
    }

    /// The indexing rank (last in-pattern rank while off-pattern).
    pub const fn rank(self) -> u8 {
        self.rank
    }

    pub const fn is_off_pattern(self) -> bool {
        self.off_pattern
    }
}

/// The 8-integer close-inspection state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InspectionState {
    /// Neighbor knowledge in N, E, S, W order (`s[0]..s[3]`).
    pub neighbors: [CellKnowledge; 4],
    /// Status of the robot's cell (`s[4]`).
    pub current: CurrentCell,
    /// Last action taken (`s[5]`).
    pub last_action: Direction,
    /// Sequence phase (`s[6]`).
    pub phase: Phase,
    /// Current horizontal grazing direction (`s[7]`); seeded with the last
    /// horizontal direction before close inspection started and updated by
    /// every horizontal move.
    pub entry_dir: HorizDir,
}

impl InspectionState {
    /// The displayed integer vector `[s0..s7]`.
    pub fn vector(&self) -> [u8; 8] {
        [
            self.neighbors[0].code(),
            self.neighbors[1].code(),
            self.neighbors[2].code(),
            self.neighbors[3].code(),
            self.current.code(),
            self.last_action.code(),
            self.phase.value(),
            self.entry_dir.code(),
        ]
    }
}

/// Mixed-radix dense index over the 73728 valid tuples. Off-pattern states
/// index through their carried rank, sharing the slot of the in-pattern
/// state they left.
pub fn state_index(s: &InspectionState) -> usize {
    let mut idx = 0usize;
    for n in s.neighbors {
        idx = idx * 4 + n.code() as usize;
    }
    idx = idx * 4 + s.current.code() as usize;
    idx = idx * 4 + s.last_action.code() as usize;
    idx = idx * 9 + s.phase.rank() as usize;
    idx = idx * 2 + s.entry_dir.code() as usize;
    idx
}

/// Inverse of [`state_index`]; always yields an in-pattern phase.
pub fn decode_state(mut idx: usize) -> InspectionState {
    assert!(idx < STATE_COUNT, "state index {idx} out of range");
    let entry_dir = HorizDir::from_code((idx % 2) as u8).unwrap();
    idx /= 2;
    let phase = Phase::in_pattern((idx % 9) as u8);
    idx /= 9;
    let last_action = Direction::from_code((idx % 4) as u8).unwrap();
    idx /= 4;
    let current = CurrentCell::from_code((idx % 4) as u8).unwrap();
    idx /= 4;
    let mut neighbors = [CellKnowledge::Unvisited; 4];
    for slot in (0..4).rev() {
        neighbors[slot] = CellKnowledge::from_code((idx % 4) as u8).unwrap();
        idx /= 4;
    }
    InspectionState { neighbors, current, last_action, phase, entry_dir }
}

/// The agent's per-cell knowledge accumulated over a run; knowledge only
/// ever refines (unvisited cells become known) and visit counts grow.
#[derive(Debug, Clone)]
pub struct BeliefGrid {
    width: u32,
    height: u32,
    knowledge: Vec<CellKnowledge>,
    visits: Vec<u32>,
}

impl BeliefGrid {
    pub fn new(width: u32, height: u32) -> Self {
        let cells = width as usize * height as usize;
        Self {
            width,
            height,
            knowledge: alloc::vec![CellKnowledge::Unvisited; cells],
            visits: alloc::vec![0; cells],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    fn idx(&self, cell: Cell) -> Option<usize> {
        if cell.x >= 0
            && cell.y >= 0
            && (cell.x as u32) < self.width
            && (cell.y as u32) < self.height
        {
            Some(cell.y as usize * self.width as usize + cell.x as usize)
        } else {
            None
        }
    }

    pub fn record_visit(&mut self, cell: Cell, anomalous: bool) {
        let idx = self.idx(cell).expect("visited cell out of bounds");
        self.visits[idx] += 1;
        self.knowledge[idx] = if anomalous {
            CellKnowledge::KnownAnomalous
        } else {
            CellKnowledge::KnownClear
        };
    }

    /// Knowledge of a cell; out-of-bounds cells report `OutOfArea`.
    pub fn knowledge(&self, cell: Cell) -> CellKnowledge {
        match self.idx(cell) {
            Some(i) => self.knowledge[i],
            None => CellKnowledge::OutOfArea,
        }
    }

    pub fn visits(&self, cell: Cell) -> u32 {
        self.idx(cell).map_or(0, |i| self.visits[i])
    }

    /// Status of the robot's own cell after its latest visit was recorded.
    pub fn current_status(&self, cell: Cell) -> CurrentCell {
        let anomalous = self.knowledge(cell) == CellKnowledge::KnownAnomalous;
        match (self.visits(cell), anomalous) {
            (1, true) => CurrentCell::FreshAnomalous,
            (1, false) => CurrentCell::FreshClear,
            (_, true) => CurrentCell::RevisitedAnomalous,
            (_, false) => CurrentCell::Revisited,
        }
    }
}

/// Reads the state vector off the belief grid at `position`.
///
/// The position's own visit must already be recorded; neighbor knowledge
/// comes from the belief, out-of-bounds neighbors read `OutOfArea`.
pub fn encode_state(
    belief: &BeliefGrid,
    position: Cell,
    last_action: Direction,
    phase: Phase,
    entry_dir: HorizDir,
) -> InspectionState {
    debug_assert!(belief.visits(position) >= 1, "encode before visit recorded");
    let neighbors = [
        belief.knowledge(position.step(Direction::North)),
        belief.knowledge(position.step(Direction::East)),
        belief.knowledge(position.step(Direction::South)),
        belief.knowledge(position.step(Direction::West)),
    ];
    InspectionState {
        neighbors,
        current: belief.current_status(position),
        last_action,
        phase,
        entry_dir,
    }
}

/// The desirable-pattern table: next rank for an in-pattern move, or
/// `None` when the move falls outside the pattern. The two self-loops at
/// the lateral-step phases (another grazing-direction step, i.e. a skipped
/// column) are in the table but are not desirable; [`reward`] singles them
/// out.
fn pattern_table(rank: u8, action: Direction, anomalous: bool, lateral: Direction) -> Option<u8> {
    use Direction::{North, South};
    match (rank, action) {
        (0, North) | (1, North) => Some(if anomalous { 1 } else { 2 }),
        (0, South) => Some(if anomalous { 4 } else { 5 }),
        (2, a) if a == lateral => Some(3),
        (3, South) => Some(if anomalous { 4 } else { 8 }),
        (3, a) if a == lateral => Some(3),
        (4, South) => Some(if anomalous { 4 } else { 5 }),
        (8, South) => Some(if anomalous { 4 } else { 8 }),
        (5, a) if a == lateral => Some(6),
        (6, North) => Some(if anomalous { 1 } else { 7 }),
        (6, a) if a == lateral => Some(6),
        (7, North) => Some(if anomalous { 1 } else { 7 }),
        _ => None,
    }
}

/// Whether `(rank, action)` is the lateral-step self-loop (a second
/// grazing-direction step that skips a column).
fn is_skip(rank: u8, action: Direction, lateral: Direction) -> bool {
    matches!(rank, 3 | 6) && action == lateral
}

/// Advances the sequence automaton by one executed move.
///
/// `status` is the destination cell's `s[4]` value and `entry_dir` the
/// grazing direction in force before the move. Transitions absent from the
/// pattern table yield the off-pattern sentinel; from off-pattern, a
/// table-matching move (judged from the carried rank) re-enters the
/// corresponding phase.
pub fn phase_transition(
    prev: Phase,
    action: Direction,
    status: CurrentCell,
    entry_dir: HorizDir,
) -> Phase {
    let lateral = entry_dir.direction();
    match pattern_table(prev.rank(), action, status.is_anomalous(), lateral) {
        Some(next) => Phase::in_pattern(next),
        None => Phase::off_pattern(prev.rank()),
    }
}

/// Tracks the inspection-local state components (last action, phase,
/// grazing direction) across moves, with one shared update order for
/// training episodes and the live controller.
#[derive(Debug, Clone, Copy)]
pub struct InspectionCursor {
    pub last_action: Direction,
    pub phase: Phase,
    pub entry_dir: HorizDir,
}

impl InspectionCursor {
    /// A cursor at the moment close inspection starts: phase `ENTRY`,
    /// seeded with the move that landed on the trigger cell and the
    /// horizontal direction in force at that moment.
    pub fn enter(last_action: Direction, entry_dir: HorizDir) -> Self {
        Self { last_action, phase: Phase::ENTRY, entry_dir }
    }

    pub fn state(&self, belief: &BeliefGrid, position: Cell) -> InspectionState {
        encode_state(belief, position, self.last_action, self.phase, self.entry_dir)
    }

    /// Advances the cursor after a move to `dest` was executed and its
    /// visit recorded in `belief`; returns the new encoded state.
    pub fn advance(
        &mut self,
        belief: &BeliefGrid,
        dest: Cell,
        action: Direction,
    ) -> InspectionState {
        let status = belief.current_status(dest);
        self.phase = phase_transition(self.phase, action, status, self.entry_dir);
        if let Some(h) = HorizDir::from_direction(action) {
            self.entry_dir = h;
        }
        self.last_action = action;
        encode_state(belief, dest, action, self.phase, self.entry_dir)
    }
}

/// The close-inspection reward, evaluated strictly in order: off-pattern
/// sentinel, desirable advance onto a first-visit cell, doubled lateral
/// step, and the residual penalty.
pub fn reward(previous: &InspectionState, new: &InspectionState) -> i32 {
    let action = new.last_action;
    let lateral = previous.entry_dir.direction();
    if new.phase.is_off_pattern() {
        return -1;
    }
    let via_skip =
        is_skip(previous.phase.rank(), action, lateral) && new.phase.rank() == previous.phase.rank();
    if !via_skip && new.current.is_fresh() {
        return 1;
    }
    if matches!(previous.phase.value(), 3 | 6) && action == lateral {
        return -10;
    }
    -1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridMap;

    fn all_phases() -> Vec<Phase> {
        let mut phases: Vec<Phase> = (0..=8).map(Phase::in_pattern).collect();
        phases.extend((0..=8).map(Phase::off_pattern));
        phases
    }

    #[test]
    fn index_round_trips_every_valid_tuple() {
        let mut seen = alloc::vec![false; STATE_COUNT];
        for idx in 0..STATE_COUNT {
            let state = decode_state(idx);
            let back = state_index(&state);
            assert_eq!(back, idx);
            assert!(!seen[idx]);
            seen[idx] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn index_extremes() {
        let zero = decode_state(0);
        assert_eq!(zero.vector(), [0, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(state_index(&zero), 0);
        let max = InspectionState {
            neighbors: [CellKnowledge::OutOfArea; 4],
            current: CurrentCell::FreshAnomalous,
            last_action: Direction::West,
            phase: Phase::DESCEND_SEEK,
            entry_dir: HorizDir::West,
        };
        assert_eq!(state_index(&max), STATE_COUNT - 1);
    }

    #[test]
    fn off_pattern_state_shares_its_carried_ranks_slot() {
        let mut state = decode_state(12_345);
        let in_pattern_idx = state_index(&state);
        state.phase = Phase::off_pattern(state.phase.rank());
        assert_eq!(state.phase.value(), OFF_PATTERN);
        assert_eq!(state_index(&state), in_pattern_idx);
    }

    #[test]
    fn corner_neighbors_encode_out_of_area() {
        let map = GridMap::empty(10, 10).unwrap();
        let mut belief = BeliefGrid::new(map.width(), map.height());
        let corner = Cell::new(0, 0);
        belief.record_visit(corner, false);
        let s = encode_state(&belief, corner, Direction::East, Phase::ENTRY, HorizDir::East);
        assert_eq!(s.neighbors[0], CellKnowledge::OutOfArea); // North
        assert_eq!(s.neighbors[3], CellKnowledge::OutOfArea); // West
        assert_eq!(s.neighbors[1], CellKnowledge::Unvisited); // East
        assert_eq!(s.neighbors[2], CellKnowledge::Unvisited); // South
    }

    #[test]
    fn fresh_anomaly_with_unvisited_neighbors() {
        let mut belief = BeliefGrid::new(10, 10);
        let pos = Cell::new(5, 5);
        belief.record_visit(pos, true);
        let s = encode_state(&belief, pos, Direction::East, Phase::ENTRY, HorizDir::East);
        assert_eq!(s.vector()[0..6], [0, 0, 0, 0, 3, 1]);
    }

    #[test]
    fn revisited_clear_cell_has_status_zero() {
        let mut belief = BeliefGrid::new(10, 10);
        let pos = Cell::new(2, 2);
        belief.record_visit(pos, false);
        belief.record_visit(pos, false);
        let s = encode_state(&belief, pos, Direction::South, Phase::ENTRY, HorizDir::East);
        assert_eq!(s.current, CurrentCell::Revisited);
        assert_eq!(s.current.code(), 0);
    }

    #[test]
    fn entry_ascends_onto_fresh_anomaly() {
        let next = phase_transition(
            Phase::ENTRY,
            Direction::North,
            CurrentCell::FreshAnomalous,
            HorizDir::East,
        );
        assert_eq!(next, Phase::ASCEND);
    }

    #[test]
    fn reverse_lateral_move_leaves_the_pattern() {
        let next = phase_transition(
            Phase::ASCEND,
            Direction::West,
            CurrentCell::FreshClear,
            HorizDir::East,
        );
        assert_eq!(next.value(), OFF_PATTERN);
        assert_eq!(next.rank(), Phase::ASCEND.rank());
    }

    #[test]
    fn off_pattern_reenters_on_matching_move() {
        let off = Phase::off_pattern(Phase::TOP_EXIT.rank());
        let next =
            phase_transition(off, Direction::East, CurrentCell::FreshClear, HorizDir::East);
        assert_eq!(next, Phase::TOP_STEP);
        // A non-matching move stays parked at the sentinel.
        let parked =
            phase_transition(off, Direction::West, CurrentCell::FreshClear, HorizDir::East);
        assert!(parked.is_off_pattern());
        assert_eq!(parked.rank(), Phase::TOP_EXIT.rank());
    }

    #[test]
    fn grazing_cycle_walks_the_table() {
        use CurrentCell::{FreshAnomalous as A, FreshClear as C};
        use Direction::{East, North, South};
        let e = HorizDir::East;
        let mut phase = Phase::ENTRY;
        // Up the first column, out the top, step, down the next column,
        // out the bottom, step, and back up.
        for (action, status, expect) in [
            (North, A, Phase::ASCEND),
            (North, A, Phase::ASCEND),
            (North, C, Phase::TOP_EXIT),
            (East, C, Phase::TOP_STEP),
            (South, C, Phase::DESCEND_SEEK),
            (South, A, Phase::DESCEND),
            (South, A, Phase::DESCEND),
            (South, C, Phase::BOTTOM_EXIT),
            (East, C, Phase::BOTTOM_STEP),
            (North, C, Phase::ASCEND_SEEK),
            (North, A, Phase::ASCEND),
        ] {
            phase = phase_transition(phase, action, status, e);
            assert_eq!(phase, expect);
        }
    }

    #[test]
    fn transition_is_total_and_deterministic() {
        for phase in all_phases() {
            for action in Direction::ALL {
                for status_code in 0..4 {
                    let status = CurrentCell::from_code(status_code).unwrap();
                    for dir in [HorizDir::East, HorizDir::West] {
                        let a = phase_transition(phase, action, status, dir);
                        let b = phase_transition(phase, action, status, dir);
                        assert_eq!(a, b);
                        assert!(a.value() <= 8 || a.value() == OFF_PATTERN);
                    }
                }
            }
        }
    }

    fn state_with(phase: Phase, current: CurrentCell, last_action: Direction) -> InspectionState {
        InspectionState {
            neighbors: [CellKnowledge::Unvisited; 4],
            current,
            last_action,
            phase,
            entry_dir: HorizDir::East,
        }
    }

    #[test]
    fn reward_branch_one_off_pattern_sentinel() {
        let prev = state_with(Phase::ASCEND, CurrentCell::FreshAnomalous, Direction::North);
        let new = state_with(
            Phase::off_pattern(1),
            CurrentCell::FreshClear,
            Direction::West,
        );
        assert_eq!(reward(&prev, &new), -1);
    }

    #[test]
    fn reward_branch_two_desirable_discovery() {
        let prev = state_with(Phase::ENTRY, CurrentCell::FreshAnomalous, Direction::East);
        let new = state_with(Phase::ASCEND, CurrentCell::FreshAnomalous, Direction::North);
        assert_eq!(reward(&prev, &new), 1);
    }

    #[test]
    fn reward_branch_three_double_lateral_step() {
        let prev = state_with(Phase::TOP_STEP, CurrentCell::FreshClear, Direction::East);
        // Another East step while grazing east: column skipped.
        let new = state_with(Phase::TOP_STEP, CurrentCell::FreshClear, Direction::East);
        assert_eq!(reward(&prev, &new), -10);
        let prev = state_with(Phase::BOTTOM_STEP, CurrentCell::Revisited, Direction::East);
        let new = state_with(Phase::BOTTOM_STEP, CurrentCell::Revisited, Direction::East);
        assert_eq!(reward(&prev, &new), -10);
    }

    #[test]
    fn reward_branch_four_in_pattern_revisit() {
        let prev = state_with(Phase::ASCEND, CurrentCell::FreshAnomalous, Direction::North);
        let new = state_with(
            Phase::ASCEND,
            CurrentCell::RevisitedAnomalous,
            Direction::North,
        );
        assert_eq!(reward(&prev, &new), -1);
    }

    #[test]
    fn sentinel_check_dominates_discovery() {
        // Fresh cell but off-pattern: branch one wins.
        let prev = state_with(Phase::ASCEND, CurrentCell::FreshAnomalous, Direction::North);
        let new = state_with(
            Phase::off_pattern(1),
            CurrentCell::FreshAnomalous,
            Direction::South,
        );
        assert_eq!(reward(&prev, &new), -1);
    }

    #[test]
    fn reward_range_is_exactly_three_values() {
        for prev_phase in all_phases() {
            for new_phase in all_phases() {
                for prev_cur in 0..4 {
                    for new_cur in 0..4 {
                        for action in Direction::ALL {
                            let prev = state_with(
                                prev_phase,
                                CurrentCell::from_code(prev_cur).unwrap(),
                                Direction::North,
                            );
                            let new = state_with(
                                new_phase,
                                CurrentCell::from_code(new_cur).unwrap(),
                                action,
                            );
                            let r = reward(&prev, &new);
                            assert!(r == -10 || r == -1 || r == 1, "reward {r} out of range");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn belief_knowledge_only_refines() {
        let mut belief = BeliefGrid::new(4, 4);
        let cell = Cell::new(1, 1);
        assert_eq!(belief.knowledge(cell), CellKnowledge::Unvisited);
        belief.record_visit(cell, true);
        assert_eq!(belief.knowledge(cell), CellKnowledge::KnownAnomalous);
        belief.record_visit(cell, true);
        assert_eq!(belief.knowledge(cell), CellKnowledge::KnownAnomalous);
        assert_eq!(belief.visits(cell), 2);
        assert_eq!(belief.knowledge(Cell::new(-1, 0)), CellKnowledge::OutOfArea);
    }
}
