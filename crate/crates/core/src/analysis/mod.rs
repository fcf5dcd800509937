//! Start-up times, the velocity switch and peak scaling.

mod peaks;
mod startup;
mod switch;

pub use peaks::{
    envelope_peaks, extract_peaks, fit_peak_scaling, fit_power_law, measure_series, peak_table, select_peaks, Peak, PeakFit, PeakOrder,
    DOMINANCE_WINDOW, MERGE_WINDOW, NOISE_FLOOR,
};
pub use startup::{
    scan_startup, scan_startup_many, startup_time, startup_times, Horizon, ScanGrid, StartupScan, Target, DEFAULT_DT,
    DEFAULT_HORIZON_PER_SITE,
};
pub use switch::{detect_switch, velocity, SegmentFit, Velocity, MIN_SWITCH_ENTRIES, MIN_VELOCITY_R2, SWITCH_FACTOR};

use crate::measures::{self, EndPairState, Measure};

/// Evaluates measures on one state, reusing MI and CC between requests.
pub(crate) struct Lazy<'a> {
    state: &'a EndPairState,
    mi: Option<f64>,
    cc: Option<f64>,
}

impl<'a> Lazy<'a> {
    pub(crate) fn new(state: &'a EndPairState) -> Self {
        Lazy { state, mi: None, cc: None }
    }

    fn mi(&mut self) -> f64 {
        *self.mi.get_or_insert_with(|| measures::mutual_information(self.state))
    }

    fn cc(&mut self) -> f64 {
        *self.cc.get_or_insert_with(|| measures::classical_correlation(self.state))
    }

    pub(crate) fn value(&mut self, m: Measure) -> f64 {
        match m {
            Measure::Mi => self.mi(),
            Measure::Cc => self.cc(),
            Measure::Qd => {
                let (mi, cc) = (self.mi(), self.cc());
                measures::quantum_discord_from(mi, cc)
            }
            other => other.evaluate(self.state),
        }
    }

    /// Whether `|m| ≥ criterion`. QD and CC never exceed MI, so the optimizer
    /// is skipped while MI is below the threshold.
    pub(crate) fn reaches(&mut self, m: Measure, criterion: f64) -> bool {
        if m.bounded_by_mi() && self.mi() < criterion {
            return false;
        }
        self.value(m).abs() >= criterion
    }
}
