use serde::{Deserialize, Serialize};

use super::StartupScan;
use crate::error::{Error, Result};
use crate::fit::{least_squares, LineFit};

pub const MIN_SWITCH_ENTRIES: usize = 8;
/// A forward difference counts as a jump above this multiple of the median.
pub const SWITCH_FACTOR: f64 = 3.0;
/// Segment fits below this r² give unreliable velocities.
pub const MIN_VELOCITY_R2: f64 = 0.98;

/// Line fit of start-up time against `N` over `entries[start..end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentFit {
    pub start: usize,
    pub end: usize,
    pub fit: LineFit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Velocity {
    /// Sites per unit time, `1/slope`.
    pub value: f64,
    pub reliable: bool,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn fit_segment(entries: &[(usize, f64)], start: usize, end: usize) -> Result<Option<SegmentFit>> {
    if end - start < 2 {
        return Ok(None);
    }
    let (x, y): (Vec<f64>, Vec<f64>) = entries[start..end].iter().map(|&(n, t)| (n as f64, t)).unzip();
    Ok(Some(SegmentFit { start, end, fit: least_squares(&x, &y)? }))
}

/// Locates the largest jump of the start-up curve and fits a line to each
/// side of it.
///
/// The jump at `i` (between `entries[i−1]` and `entries[i]`) is accepted when
/// it exceeds three times the median forward difference; all indices passing
/// that test are listed in `jumps`.
pub fn detect_switch(mut scan: StartupScan) -> Result<StartupScan> {
    let len = scan.entries.len();
    if len < MIN_SWITCH_ENTRIES {
        return Err(Error::TooFewEntries { have: len, need: MIN_SWITCH_ENTRIES });
    }
    let diffs: Vec<f64> = scan.entries.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let threshold = SWITCH_FACTOR * median(&diffs).max(0.0);
    let mut best: Option<usize> = None;
    for (i, &d) in diffs.iter().enumerate() {
        if best.map_or(true, |b| d > diffs[b]) {
            best = Some(i);
        }
    }
    scan.jumps = diffs
        .iter()
        .enumerate()
        .filter(|&(_, &d)| d > threshold && d > 0.0)
        .map(|(i, _)| i + 1)
        .collect();
    scan.switch_index = best.filter(|&i| diffs[i] > threshold && diffs[i] > 0.0).map(|i| i + 1);

    let bounds = match scan.switch_index {
        Some(s) => vec![(0, s), (s, len)],
        None => vec![(0, len)],
    };
    scan.segment_fits = bounds
        .into_iter()
        .map(|(a, b)| fit_segment(&scan.entries, a, b))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(scan)
}

/// Generalized velocity of segment `segment` (0 = before the switch).
pub fn velocity(scan: &StartupScan, segment: usize) -> Result<Velocity> {
    let fit = scan.segment_fits.get(segment).ok_or(Error::MissingFit(segment))?.fit;
    Ok(Velocity {
        value: 1.0 / fit.slope,
        reliable: fit.slope > 0.0 && fit.r_squared >= MIN_VELOCITY_R2,
    })
}
