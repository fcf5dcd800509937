//! Correlations between the two end spins.
//!
//! With one magnon on the chain the reduced state of spins 1 and N lives on
//! `{|00⟩, |01⟩, |10⟩, |11⟩}` (1 = flipped) and only has populations
//! `(0, p₁, p_N, 1 − p₁ − p_N)` plus the coherence `⟨01|ρ|10⟩ = A₁·A_N*`.
//! Everything below uses that structure; [`crate::density`] holds the
//! generic 4×4 versions used to check it.

use std::f64::consts::{FRAC_PI_2, LN_2};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{build_mode_table, ChainSpec};
use crate::density::Matrix4c;
use crate::error::{Error, Result};

/// Slack allowed on the state invariants.
pub const STATE_TOL: f64 = 1e-12;

/// Negative discord above this is optimizer noise and is clamped to zero.
pub const DISCORD_CLAMP: f64 = 1e-9;

/// Coarse θ grid of the measurement optimizer (intervals on `[0, π/2]`).
pub const THETA_GRID: usize = 64;

/// Local refinement sweeps after the coarse grid.
pub const REFINE_ITERS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndPairState {
    pub p1: f64,
    pub p_n: f64,
    pub coherence: Complex64,
}

impl EndPairState {
    /// Checks the populations and the coherence bound.
    pub fn new(p1: f64, p_n: f64, coherence: Complex64) -> Result<Self> {
        let finite = p1.is_finite() && p_n.is_finite() && coherence.re.is_finite() && coherence.im.is_finite();
        if !finite || p1 < 0.0 || p_n < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "populations must be finite and non-negative, got p1={p1}, pN={p_n}"
            )));
        }
        if p1 + p_n > 1.0 + STATE_TOL {
            return Err(Error::NormBound(p1 + p_n));
        }
        if coherence.norm_sqr() > p1 * p_n + STATE_TOL {
            return Err(Error::InvalidArgument(format!(
                "|coherence|^2 = {} exceeds p1*pN = {}",
                coherence.norm_sqr(),
                p1 * p_n
            )));
        }
        Ok(EndPairState { p1, p_n, coherence })
    }

    /// Population of `|11⟩` (magnon elsewhere on the chain).
    pub fn rest(&self) -> f64 {
        (1.0 - self.p1 - self.p_n).max(0.0)
    }

    /// The 4×4 matrix in the basis `|00⟩, |01⟩, |10⟩, |11⟩` (first index = spin 1).
    pub fn density_matrix(&self) -> Matrix4c {
        let mut rho = Matrix4c::zeros();
        rho[(1, 1)] = Complex64::new(self.p1, 0.0);
        rho[(2, 2)] = Complex64::new(self.p_n, 0.0);
        rho[(3, 3)] = Complex64::new(self.rest(), 0.0);
        rho[(1, 2)] = self.coherence;
        rho[(2, 1)] = self.coherence.conj();
        rho
    }
}

pub fn end_pair_state(a1: Complex64, a_n: Complex64) -> Result<EndPairState> {
    let (p1, p_n) = (a1.norm_sqr(), a_n.norm_sqr());
    if !(p1 + p_n <= 1.0 + STATE_TOL) {
        return Err(Error::NormBound(p1 + p_n));
    }
    Ok(EndPairState { p1, p_n, coherence: a1 * a_n.conj() })
}

pub fn cf_zz(state: &EndPairState) -> f64 {
    -4.0 * state.p1 * state.p_n
}

pub fn cf_xx(state: &EndPairState) -> f64 {
    2.0 * state.coherence.re
}

/// Binary entropy in bits.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    (-x * x.ln() - (1.0 - x) * (-x).ln_1p()) / LN_2
}

/// `p·ln(s/p)` for `s = p + other`, accurate when `other ≪ p`.
fn share_log(p: f64, other: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * (other / p).ln_1p()
    }
}

/// `−(1−x)·ln(1−x)`.
fn g(x: f64) -> f64 {
    if x >= 1.0 {
        0.0
    } else {
        -(1.0 - x) * (-x).ln_1p()
    }
}

/// `g(p1) + g(pN) − g(p1 + pN)`, by series when the cancellation is severe.
fn bulk_term(p1: f64, p_n: f64) -> f64 {
    let s = p1 + p_n;
    if s >= 0.5 {
        return g(p1) + g(p_n) - g(s.min(1.0));
    }
    // Σ_{n≥2} (sⁿ − p1ⁿ − pNⁿ)/(n(n−1)) with d_n = sⁿ − p1ⁿ − pNⁿ.
    let prod = p1 * p_n;
    let mut d = 2.0 * prod;
    let (mut pow1, mut pow_n) = (p1, p_n);
    let mut total = 0.0;
    for n in 2..400 {
        let term = d / (n * (n - 1)) as f64;
        total += term;
        if term <= total * 1e-17 {
            break;
        }
        d = s * d + prod * (pow1 + pow_n);
        pow1 *= p1;
        pow_n *= p_n;
    }
    total
}

/// `S(ρ₁) + S(ρ_N) − S(ρ₁N)` in bits.
///
/// The entropies are regrouped so that no two large terms cancel: for a
/// weak signal (`p_N ≪ 1`) the result is accurate to relative precision
/// rather than to `1e-16` absolute.
pub fn mutual_information(state: &EndPairState) -> f64 {
    let (p1, p_n) = (state.p1, state.p_n);
    let s = p1 + p_n;
    if s <= 0.0 {
        return 0.0;
    }
    let c2 = state.coherence.norm_sqr();
    let half_diff = 0.5 * (p1 - p_n);
    let lam_plus = 0.5 * s + (half_diff * half_diff + c2).sqrt();
    let lam_minus = (p1 * p_n - c2).max(0.0) / lam_plus;

    let marginal = share_log(p1, p_n) + share_log(p_n, p1);
    let joint = if lam_minus > 0.0 {
        lam_minus * (lam_minus / s).ln() + lam_plus * (-lam_minus / s).ln_1p()
    } else {
        0.0
    };
    let total = marginal + joint + bulk_term(p1, p_n);
    total.max(0.0) / LN_2
}

/// Closed form for pure end states (`|coherence|² = p₁p_N`).
pub fn mutual_information_closed_form(p1: f64, p_n: f64) -> f64 {
    let q = 1.0 - p1 - p_n;
    let xlx = |x: f64| if x <= 0.0 { 0.0 } else { x * x.log2() };
    -xlx(1.0 - p1) - xlx(p1) - xlx(1.0 - p_n) - xlx(p_n) + xlx(p1 + p_n) + xlx(q)
}

/// Entropy of a 2×2 density matrix from its trace `p` and determinant `det`
/// after normalization by `p` (so eigenvalues are `μ` and `1 − μ`).
fn conditional_entropy(p: f64, det: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    let det = det.max(0.0) / (p * p);
    let mu = 2.0 * det / (1.0 + (1.0 - 4.0 * det).max(0.0).sqrt());
    binary_entropy(mu)
}

/// Holevo quantity of the projective measurement on spin N along the Bloch
/// polar angle `θ`.
///
/// The state is invariant under a joint z-rotation, so the azimuth of the
/// measurement axis does not matter.
pub fn holevo_chi(state: &EndPairState, theta: f64) -> f64 {
    let (p1, p_n, q) = (state.p1, state.p_n, state.rest());
    let c2 = state.coherence.norm_sqr();
    let u = 0.5 * (1.0 + theta.cos());
    let v = 0.5 * (1.0 - theta.cos());
    let cross = c2 * u * v;

    let (a00, a11) = (p1 * v, p_n * u + q * v);
    let (b00, b11) = (p1 * u, p_n * v + q * u);
    let (pa, pb) = (a00 + a11, b00 + b11);

    binary_entropy(p1) - pa * conditional_entropy(pa, a00 * a11 - cross) - pb * conditional_entropy(pb, b00 * b11 - cross)
}

/// Maximal Holevo quantity over projective measurements on spin N.
///
/// Coarse grid of 65 polar angles on `[0, π/2]` (both ends included), then
/// 30 sweeps of a shrinking-step coordinate search around the best point.
pub fn classical_correlation(state: &EndPairState) -> f64 {
    let h = FRAC_PI_2 / THETA_GRID as f64;
    let (mut best_theta, mut best) = (0.0, holevo_chi(state, 0.0));
    for i in 1..=THETA_GRID {
        let theta = i as f64 * h;
        let chi = holevo_chi(state, theta);
        if chi > best {
            (best_theta, best) = (theta, chi);
        }
    }
    let mut step = h;
    for _ in 0..REFINE_ITERS {
        let mut moved = false;
        for cand in [best_theta - step, best_theta + step] {
            let cand = cand.clamp(0.0, FRAC_PI_2);
            let chi = holevo_chi(state, cand);
            if chi > best {
                (best_theta, best) = (cand, chi);
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    best
}

pub fn quantum_discord_from(mi: f64, cc: f64) -> f64 {
    let qd = mi - cc;
    if qd < 0.0 && qd > -DISCORD_CLAMP {
        0.0
    } else {
        qd
    }
}

pub fn quantum_discord(state: &EndPairState) -> f64 {
    quantum_discord_from(mutual_information(state), classical_correlation(state))
}

/// `2|ρ₀₁,₁₀|`; the corners `ρ₀₀,₀₀` and `ρ₀₀,₁₁` vanish, so this is the
/// full spin-flip concurrence.
pub fn concurrence(state: &EndPairState) -> f64 {
    (2.0 * state.coherence.norm()).min(1.0)
}

pub fn entanglement_of_formation(state: &EndPairState) -> f64 {
    let c = concurrence(state);
    // Smaller root of x(1−x) = C²/4, written without cancellation.
    let x = c * c / (2.0 * (1.0 + (1.0 - c * c).max(0.0).sqrt()));
    binary_entropy(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Mi,
    Qd,
    Cc,
    Eof,
    CfZz,
    CfXx,
}

impl Measure {
    pub const ALL: [Measure; 6] = [Measure::Mi, Measure::Qd, Measure::Cc, Measure::Eof, Measure::CfZz, Measure::CfXx];

    pub const fn name(self) -> &'static str {
        match self {
            Measure::Mi => "mi",
            Measure::Qd => "qd",
            Measure::Cc => "cc",
            Measure::Eof => "eof",
            Measure::CfZz => "cfzz",
            Measure::CfXx => "cfxx",
        }
    }

    pub fn evaluate(self, state: &EndPairState) -> f64 {
        match self {
            Measure::Mi => mutual_information(state),
            Measure::Qd => quantum_discord(state),
            Measure::Cc => classical_correlation(state),
            Measure::Eof => entanglement_of_formation(state),
            Measure::CfZz => cf_zz(state),
            Measure::CfXx => cf_xx(state),
        }
    }

    /// Whether the value is bounded above by the mutual information, which
    /// is much cheaper to evaluate.
    pub fn bounded_by_mi(self) -> bool {
        matches!(self, Measure::Qd | Measure::Cc)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "mi" => Ok(Measure::Mi),
            "qd" => Ok(Measure::Qd),
            "cc" => Ok(Measure::Cc),
            "eof" => Ok(Measure::Eof),
            "cfzz" | "zz" => Ok(Measure::CfZz),
            "cfxx" | "xx" => Ok(Measure::CfXx),
            other => Err(Error::InvalidArgument(format!("unknown measure `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSample {
    pub time: f64,
    pub cf_zz: f64,
    pub cf_xx: f64,
    pub mi: f64,
    pub cc: f64,
    pub qd: f64,
    pub eof: f64,
}

impl CorrelationSample {
    pub fn at(time: f64, state: &EndPairState) -> Self {
        let mi = mutual_information(state);
        let cc = classical_correlation(state);
        CorrelationSample {
            time,
            cf_zz: cf_zz(state),
            cf_xx: cf_xx(state),
            mi,
            cc,
            qd: quantum_discord_from(mi, cc),
            eof: entanglement_of_formation(state),
        }
    }

    pub fn get(&self, measure: Measure) -> f64 {
        match measure {
            Measure::Mi => self.mi,
            Measure::Qd => self.qd,
            Measure::Cc => self.cc,
            Measure::Eof => self.eof,
            Measure::CfZz => self.cf_zz,
            Measure::CfXx => self.cf_xx,
        }
    }
}

/// All six measures at each time. Times must be finite, non-negative and
/// strictly increasing.
pub fn sample_all(spec: &ChainSpec, times: &[f64]) -> Result<Vec<CorrelationSample>> {
    for (i, &t) in times.iter().enumerate() {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!("time must be finite and non-negative, got {t}")));
        }
        if i > 0 && t <= times[i - 1] {
            return Err(Error::InvalidArgument("times must be strictly increasing".into()));
        }
    }
    let prop = build_mode_table(spec)?.end_propagator();
    times
        .par_iter()
        .map(|&t| {
            let (a1, a_n) = prop.relative_at(t);
            Ok(CorrelationSample::at(t, &end_pair_state(a1, a_n)?))
        })
        .collect()
}
