use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Lazy;
use crate::chain::{build_mode_table, ChainSpec, EndPropagator};
use crate::error::{Error, Result};
use crate::fit::LineFit;
use crate::measures::{end_pair_state, Measure};

pub const DEFAULT_DT: f64 = 0.02;
pub const DEFAULT_HORIZON_PER_SITE: f64 = 2.5;
/// Bisection stops when the bracket is shorter than `dt / BISECTION_DIVISOR`.
pub const BISECTION_DIVISOR: f64 = 1000.0;

/// End of the time window, in units of `1/J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Horizon {
    Fixed(f64),
    /// `factor · N`.
    PerSite(f64),
}

impl Horizon {
    pub fn for_sites(self, n_sites: usize) -> f64 {
        match self {
            Horizon::Fixed(t) => t,
            Horizon::PerSite(f) => f * n_sites as f64,
        }
    }
}

/// Time grid for scans over chain length, in units of `1/J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub dt: f64,
    pub horizon: Horizon,
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid { dt: DEFAULT_DT, horizon: Horizon::PerSite(DEFAULT_HORIZON_PER_SITE) }
    }
}

/// A `(measure, δ)` pair whose start-up time is wanted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub measure: Measure,
    pub criterion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartupScan {
    pub measure: Measure,
    pub criterion: f64,
    /// `(N, start-up time)` sorted by `N`.
    pub entries: Vec<(usize, f64)>,
    /// Chain lengths that never reached the criterion inside the window.
    pub excluded: Vec<usize>,
    pub switch_index: Option<usize>,
    /// Every index `i` with `t[i] − t[i−1]` above the switch threshold.
    pub jumps: Vec<usize>,
    pub segment_fits: Vec<super::SegmentFit>,
}

impl StartupScan {
    pub fn switch_sites(&self) -> Option<usize> {
        self.switch_index.map(|i| self.entries[i].0)
    }

    pub fn first_fit(&self) -> Option<&LineFit> {
        self.segment_fits.first().map(|s| &s.fit)
    }
}

fn check_grid(dt: f64, t_max: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(t_max.is_finite() && t_max > dt) {
        return Err(Error::InvalidArgument(format!("t_max must exceed dt, got t_max={t_max}, dt={dt}")));
    }
    Ok(())
}

fn check_target(target: &Target) -> Result<()> {
    if target.criterion.is_finite() && target.criterion > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("criterion must be positive, got {}", target.criterion)))
    }
}

/// Number of grid points `0, dt, …` not beyond `t_max`.
pub(crate) fn grid_len(dt: f64, t_max: f64) -> usize {
    (t_max / dt * (1.0 + 1e-12)).floor() as usize + 1
}

fn reaches_at(prop: &EndPropagator, t: f64, target: &Target) -> Result<bool> {
    let (a1, a_n) = prop.relative_at(t);
    let state = end_pair_state(a1, a_n)?;
    Ok(Lazy::new(&state).reaches(target.measure, target.criterion))
}

/// Shrinks `(lo, hi]` around the crossing and returns the upper end.
fn bisect(prop: &EndPropagator, target: &Target, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if reaches_at(prop, mid, target)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// First time each target's `|measure|` reaches its criterion on the grid
/// `{0, dt, …, ≤ t_max}`, refined by bisection to `dt/1000`. One pass over
/// the grid serves all targets.
pub fn startup_times(spec: &ChainSpec, targets: &[Target], dt: f64, t_max: f64) -> Result<Vec<Option<f64>>> {
    check_grid(dt, t_max)?;
    targets.iter().try_for_each(check_target)?;
    let prop = build_mode_table(spec)?.end_propagator();
    let mut found: Vec<Option<f64>> = vec![None; targets.len()];
    let mut pending = targets.len();
    let mut prev_t = 0.0;
    for (t, a1, a_n) in prop.grid(dt, grid_len(dt, t_max)) {
        if pending == 0 {
            break;
        }
        let state = end_pair_state(a1, a_n)?;
        let mut lazy = Lazy::new(&state);
        for (slot, target) in found.iter_mut().zip(targets) {
            if slot.is_some() || !lazy.reaches(target.measure, target.criterion) {
                continue;
            }
            *slot = Some(if t == 0.0 { 0.0 } else { bisect(&prop, target, prev_t, t, dt / BISECTION_DIVISOR)? });
            pending -= 1;
        }
        prev_t = t;
    }
    Ok(found)
}

pub fn startup_time(spec: &ChainSpec, measure: Measure, criterion: f64, t_max: f64, dt: f64) -> Result<Option<f64>> {
    Ok(startup_times(spec, &[Target { measure, criterion }], dt, t_max)?[0])
}

/// Start-up times for several targets over a range of chain lengths.
///
/// Chain lengths run in parallel on the current rayon pool; results keep
/// the order of `n_sites`. Each returned scan has no switch analysis yet.
pub fn scan_startup_many(template: &ChainSpec, targets: &[Target], n_sites: &[usize], grid: ScanGrid) -> Result<Vec<StartupScan>> {
    if let Some(&n) = n_sites.iter().find(|&&n| !(2..=1000).contains(&n)) {
        return Err(Error::InvalidArgument(format!("chain length {n} outside [2, 1000]")));
    }
    let mut ns = n_sites.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let per_n: Vec<Vec<Option<f64>>> = ns
        .par_iter()
        .map(|&n| {
            let spec = template.with_sites(n)?;
            startup_times(&spec, targets, grid.dt, grid.horizon.for_sites(n))
        })
        .collect::<Result<_>>()?;

    Ok(targets
        .iter()
        .enumerate()
        .map(|(k, target)| {
            let mut scan = StartupScan {
                measure: target.measure,
                criterion: target.criterion,
                entries: Vec::new(),
                excluded: Vec::new(),
                switch_index: None,
                jumps: Vec::new(),
                segment_fits: Vec::new(),
            };
            for (&n, times) in ns.iter().zip(&per_n) {
                match times[k] {
                    Some(t) => scan.entries.push((n, t)),
                    None => scan.excluded.push(n),
                }
            }
            scan
        })
        .collect())
}

/// Start-up time of one measure for every `N` in `n_sites`.
pub fn scan_startup(template: &ChainSpec, measure: Measure, criterion: f64, n_sites: &[usize], grid: ScanGrid) -> Result<StartupScan> {
    let scan = scan_startup_many(template, &[Target { measure, criterion }], n_sites, grid)?.remove(0);
    if scan.entries.is_empty() {
        return Err(Error::NoArrivals);
    }
    Ok(scan)
}
