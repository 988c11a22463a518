//! World-model reconstruction from the observation log and the asymmetric
//! score.
//!
//! The adaptive disk estimator pins every observed cell to its label and
//! lets each observation vouch for its surroundings within an adaptive
//! radius: half the distance to its nearest other observation, clamped to
//! [1, 10]. An unobserved cell takes the label of its nearest observation
//! when it falls inside that disk, and the no-anomaly prior otherwise.
//! All geometry is exact integer arithmetic on squared distances.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::controller::RunRecord;
use crate::grid::{Cell, GridMap, Mode, Observation};

/// Estimated anomaly field; this estimator emits hard 0/1 estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldModel {
    width: u32,
    height: u32,
    estimates: Vec<f64>,
}

impl WorldModel {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    pub fn estimate_at(&self, cell: Cell) -> Option<f64> {
        if cell.x >= 0
            && cell.y >= 0
            && (cell.x as u32) < self.width
            && (cell.y as u32) < self.height
        {
            Some(self.estimates[cell.y as usize * self.width as usize + cell.x as usize])
        } else {
            None
        }
    }
}

/// Asymmetric penalty weights; the defaults cost a missed anomaly 100x a
/// false alarm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreParams {
    /// Weight on underestimates (estimate below truth).
    pub w_miss: f64,
    /// Weight on overestimates (estimate above truth).
    pub w_false_alarm: f64,
}

impl Default for ScoreParams {
    fn default() -> Self {
        Self { w_miss: 100.0, w_false_alarm: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreError {
    DimensionMismatch,
}

impl fmt::Display for ScoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreError::DimensionMismatch => {
                write!(f, "truth and model dimensions differ")
            }
        }
    }
}

impl core::error::Error for ScoreError {}

// Scaled squared-radius bounds: a cell at squared distance dd from its
// nearest observation is covered iff 4*dd <= clamp(dd_nn, 4, 400), the
// integer form of dist <= clamp(dist_nn / 2, 1, 10).
const MIN_BOUND: u32 = 4;
const MAX_BOUND: u32 = 400;
/// Largest squared distance at which any observation can cover a cell.
const MAX_REACH_SQ: u32 = 100;
/// Beyond this squared distance a neighbor no longer tightens the clamp.
const MAX_NEIGHBOR_SQ: u32 = 400;

/// Offsets within squared distance `limit`, sorted by (distance, dy, dx)
/// so a scan meets the nearest cells first with a fixed tie order.
fn sorted_offsets(limit: u32) -> Vec<(i32, i32, u32)> {
    let r = 20i32; // covers sqrt(400)
    let mut offsets = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            let dd = (dx * dx + dy * dy) as u32;
            if dd <= limit {
                offsets.push((dx, dy, dd));
            }
        }
    }
    offsets.sort_by_key(|&(dx, dy, dd)| (dd, dy, dx));
    offsets
}

/// Builds the world model from an observation log.
///
/// Repeated observations of a cell collapse to one site (sensing is
/// noiseless); an empty log yields the all-clear prior.
pub fn estimate(observations: &[Observation], width: u32, height: u32) -> WorldModel {
    let cells = width as usize * height as usize;
    let mut observed: Vec<Option<u8>> = vec![None; cells];
    let mut sites: Vec<Cell> = Vec::new();
    for obs in observations {
        let idx = obs.cell.y as usize * width as usize + obs.cell.x as usize;
        if observed[idx].is_none() {
            observed[idx] = Some(obs.value.label());
            sites.push(obs.cell);
        }
    }
    let mut estimates = vec![0.0; cells];
    if sites.is_empty() {
        return WorldModel { width, height, estimates };
    }

    let neighbor_offsets = sorted_offsets(MAX_NEIGHBOR_SQ);
    let mut bound: Vec<u32> = vec![0; cells];
    for &site in &sites {
        let idx = site.y as usize * width as usize + site.x as usize;
        let mut nearest_sq = None;
        for &(dx, dy, dd) in &neighbor_offsets {
            if dd == 0 {
                continue;
            }
            let c = Cell::new(site.x + dx, site.y + dy);
            if c.x >= 0 && c.y >= 0 && (c.x as u32) < width && (c.y as u32) < height {
                let cidx = c.y as usize * width as usize + c.x as usize;
                if observed[cidx].is_some() {
                    nearest_sq = Some(dd);
                    break;
                }
            }
        }
        bound[idx] = nearest_sq.unwrap_or(MAX_BOUND).clamp(MIN_BOUND, MAX_BOUND);
    }

    let reach_offsets = sorted_offsets(MAX_REACH_SQ);
    for y in 0..height as i32 {
        for x in 0..width as i32 {
            let idx = y as usize * width as usize + x as usize;
            if let Some(label) = observed[idx] {
                estimates[idx] = label as f64;
                continue;
            }
            for &(dx, dy, dd) in &reach_offsets {
                let c = Cell::new(x + dx, y + dy);
                if c.x < 0 || c.y < 0 || (c.x as u32) >= width || (c.y as u32) >= height {
                    continue;
                }
                let cidx = c.y as usize * width as usize + c.x as usize;
                if let Some(label) = observed[cidx] {
                    // First hit in sorted order is the nearest observation.
                    if 4 * dd <= bound[cidx] {
                        estimates[idx] = label as f64;
                    }
                    break;
                }
            }
        }
    }
    WorldModel { width, height, estimates }
}

/// The negative asymmetric mean squared error between ground truth and the
/// model: misses (estimate below truth) carry `w_miss`, false alarms carry
/// `w_false_alarm`, exact matches contribute nothing. Always <= 0.
pub fn score_eca(
    truth: &GridMap,
    model: &WorldModel,
    params: &ScoreParams,
) -> Result<f64, ScoreError> {
    if truth.width() != model.width || truth.height() != model.height {
        return Err(ScoreError::DimensionMismatch);
    }
    let n = truth.cell_count() as f64;
    let mut total = 0.0;
    for (idx, &label) in truth.labels().iter().enumerate() {
        let y = label as f64;
        let y_hat = model.estimates[idx];
        let sq = (y - y_hat) * (y - y_hat);
        if y_hat < y {
            total += params.w_miss * sq;
        } else if y_hat > y {
            total += params.w_false_alarm * sq;
        }
    }
    Ok(-total / n)
}

/// One row of the score-over-time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScorePoint {
    pub t: u32,
    pub score: f64,
    /// Distinct anomaly cells first-visited up to and including `t`.
    pub anomalies_found: u32,
    pub mode: Mode,
}

/// Evaluates the score at every `stride` timesteps (plus the final one):
/// the model is rebuilt from the observation prefix up to each sample
/// point.
pub fn score_series(
    record: &RunRecord,
    truth: &GridMap,
    params: &ScoreParams,
    stride: u32,
) -> Result<Vec<ScorePoint>, ScoreError> {
    assert!(stride >= 1, "stride must be at least 1");
    if truth.width() != record.width || truth.height() != record.height {
        return Err(ScoreError::DimensionMismatch);
    }
    let len = record.trajectory.len();
    let cells = record.width as usize * record.height as usize;
    let mut seen = vec![false; cells];
    let mut found_prefix = Vec::with_capacity(len);
    let mut found = 0u32;
    for obs in &record.trajectory {
        let idx = obs.cell.y as usize * record.width as usize + obs.cell.x as usize;
        if !seen[idx] {
            seen[idx] = true;
            found += obs.value.is_anomaly() as u32;
        }
        found_prefix.push(found);
    }
    let mut points = Vec::new();
    let mut t = 0usize;
    loop {
        let model = estimate(&record.trajectory[..=t], record.width, record.height);
        points.push(ScorePoint {
            t: t as u32,
            score: score_eca(truth, &model, params)?,
            anomalies_found: found_prefix[t],
            mode: record.modes[t],
        });
        if t == len - 1 {
            break;
        }
        t = (t + stride as usize).min(len - 1);
    }
    Ok(points)
}
