use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::startup::{grid_len, Horizon};
use super::Lazy;
use crate::chain::{build_mode_table, ChainSpec};
use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::measures::{end_pair_state, Measure};

/// Raw maxima closer than this (in `1/J`) to a larger one are dropped.
pub const MERGE_WINDOW: f64 = 0.5;
/// An envelope peak is not exceeded for this long (in `1/J`) afterwards.
pub const DOMINANCE_WINDOW: f64 = PI;
/// Values below this are treated as zero.
pub const NOISE_FLOOR: f64 = 1e-12;
/// Relative margin for "strictly larger" between peak values; covers the
/// error of the parabolic refinement.
const VALUE_MARGIN: f64 = 1e-6;
/// Coarsest grid step accepted for peak search.
pub const MAX_PEAK_DT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub time: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeakOrder {
    First,
    Second,
}

impl PeakOrder {
    pub fn index(self) -> usize {
        match self {
            PeakOrder::First => 0,
            PeakOrder::Second => 1,
        }
    }
}

/// Power law `value = N^α e^β` fitted in log-log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakFit {
    pub measure: Measure,
    pub peak_order: PeakOrder,
    pub samples: Vec<(usize, f64)>,
    /// Chain lengths without the requested peak.
    pub skipped: Vec<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub r_squared: f64,
}

/// `|measure|` on the grid `{0, dt, …, ≤ t_max}`.
pub fn measure_series(spec: &ChainSpec, measure: Measure, dt: f64, t_max: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && t_max > dt && t_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("bad time grid: dt={dt}, t_max={t_max}")));
    }
    let prop = build_mode_table(spec)?.end_propagator();
    prop.grid(dt, grid_len(dt, t_max))
        .map(|(_, a1, a_n)| Ok(Lazy::new(&end_pair_state(a1, a_n)?).value(measure).abs()))
        .collect()
}

fn parabolic(dt: f64, i: usize, y: &[f64]) -> Peak {
    let (l, c, r) = (y[i - 1], y[i], y[i + 1]);
    let curv = l - 2.0 * c + r;
    let t = i as f64 * dt;
    if curv >= 0.0 {
        return Peak { time: t, value: c };
    }
    let offset = 0.5 * (l - r) / curv;
    Peak { time: t + offset * dt, value: c - 0.125 * (l - r) * (l - r) / curv }
}

fn raw_maxima(series: &[f64], dt: f64) -> Vec<Peak> {
    let mut raw: Vec<Peak> = (1..series.len().saturating_sub(1))
        .filter(|&i| series[i] > series[i - 1] && series[i] > series[i + 1] && series[i] >= NOISE_FLOOR)
        .map(|i| parabolic(dt, i, series))
        .collect();
    let mut by_value: Vec<usize> = (0..raw.len()).collect();
    by_value.sort_by(|&a, &b| raw[b].value.total_cmp(&raw[a].value).then(a.cmp(&b)));
    let mut keep = vec![false; raw.len()];
    let mut kept_times: Vec<f64> = Vec::new();
    for i in by_value {
        if kept_times.iter().all(|&t| (t - raw[i].time).abs() >= MERGE_WINDOW) {
            keep[i] = true;
            kept_times.push(raw[i].time);
        }
    }
    let mut k = keep.into_iter();
    raw.retain(|_| k.next().unwrap_or(false));
    raw
}

fn exceeds(a: f64, b: f64) -> bool {
    a > b * (1.0 + VALUE_MARGIN)
}

/// Peaks of the envelope of a sampled, non-negative signal.
///
/// A raw local maximum is an envelope peak when it is larger than every
/// earlier maximum and no maximum within the following `π/J` exceeds it.
/// Peaks whose window runs past the end of the series are not reported.
pub fn envelope_peaks(series: &[f64], dt: f64) -> Vec<Peak> {
    let raw = raw_maxima(series, dt);
    let t_end = (series.len().saturating_sub(1)) as f64 * dt;
    let mut record = 0.0;
    let mut peaks = Vec::new();
    for (j, p) in raw.iter().enumerate() {
        if !exceeds(p.value, record) {
            continue;
        }
        record = p.value;
        if p.time + DOMINANCE_WINDOW > t_end {
            break;
        }
        let overtaken = raw[j + 1..]
            .iter()
            .take_while(|q| q.time <= p.time + DOMINANCE_WINDOW)
            .any(|q| exceeds(q.value, p.value));
        if !overtaken {
            peaks.push(*p);
        }
    }
    peaks
}

/// The first `count` envelope peaks of `|measure|` in time order.
pub fn extract_peaks(spec: &ChainSpec, measure: Measure, t_max: f64, dt: f64, count: usize) -> Result<Vec<Peak>> {
    if count == 0 {
        return Err(Error::InvalidArgument("peak count must be at least 1".into()));
    }
    if dt > MAX_PEAK_DT {
        return Err(Error::InvalidArgument(format!("dt={dt} is too coarse for peak search (max {MAX_PEAK_DT})")));
    }
    let mut peaks = envelope_peaks(&measure_series(spec, measure, dt, t_max)?, dt);
    peaks.truncate(count);
    Ok(peaks)
}

/// Envelope peaks for each chain length, computed in parallel.
pub fn peak_table(
    template: &ChainSpec,
    measure: Measure,
    n_sites: &[usize],
    dt: f64,
    horizon: Horizon,
    count: usize,
) -> Result<Vec<(usize, Vec<Peak>)>> {
    n_sites
        .par_iter()
        .map(|&n| {
            let spec = template.with_sites(n)?;
            Ok((n, extract_peaks(&spec, measure, horizon.for_sites(n), dt, count)?))
        })
        .collect()
}

/// OLS of `ln value` on `ln N`. Needs five samples.
pub fn fit_power_law(measure: Measure, peak_order: PeakOrder, samples: Vec<(usize, f64)>, skipped: Vec<usize>) -> Result<PeakFit> {
    if samples.len() < 5 {
        return Err(Error::TooFewEntries { have: samples.len(), need: 5 });
    }
    if let Some(&(n, v)) = samples.iter().find(|&&(_, v)| !(v > 0.0)) {
        return Err(Error::InvalidArgument(format!("peak value {v} at N={n} is not positive")));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = samples.iter().map(|&(n, v)| ((n as f64).ln(), v.ln())).unzip();
    let fit = least_squares(&x, &y)?;
    Ok(PeakFit { measure, peak_order, samples, skipped, alpha: fit.slope, beta: fit.intercept, r_squared: fit.r_squared })
}

/// Splits a peak table into the samples of one peak order and the chain
/// lengths missing it.
pub fn select_peaks(table: &[(usize, Vec<Peak>)], order: PeakOrder) -> (Vec<(usize, f64)>, Vec<usize>) {
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for (n, peaks) in table {
        match peaks.get(order.index()) {
            Some(p) => samples.push((*n, p.value)),
            None => skipped.push(*n),
        }
    }
    (samples, skipped)
}

pub fn fit_peak_scaling(
    template: &ChainSpec,
    measure: Measure,
    peak_order: PeakOrder,
    n_sites: &[usize],
    dt: f64,
    horizon: Horizon,
) -> Result<PeakFit> {
    if let Some(&n) = n_sites.iter().find(|&&n| n < 3) {
        return Err(Error::InvalidArgument(format!("peak fits need N >= 3, got {n}")));
    }
    let table = peak_table(template, measure, n_sites, dt, horizon, peak_order.index() + 1)?;
    let (samples, skipped) = select_peaks(&table, peak_order);
    fit_power_law(measure, peak_order, samples, skipped)
}
