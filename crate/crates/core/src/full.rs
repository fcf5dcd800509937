//! Exact diagonalization of the chain in the full `2^N` Hilbert space.
//!
//! Used as an oracle for the single-excitation solution and to check where
//! the rotating-wave approximation holds.
//!
//! Basis ordering: each spin is expanded in its `σ^x` eigenbasis with bit 0
//! for `|+⟩` and bit 1 for `|−⟩`; the tensor product is site-major with
//! spin 1 in the most significant bit. In this basis both Hamiltonians are
//! real symmetric: `σ^x` is diagonal and `σ^z` flips one bit.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, Model, MAX_FULL_SITES};
use crate::error::{Error, Result};

/// Spectral comparison is limited to this many sites.
pub const MAX_COMPARISON_SITES: usize = 12;

/// Human-readable description of the state-vector layout, for file headers.
pub const BASIS_ORDERING: &str = "site-major tensor product, spin 1 = most significant bit; \
     per-spin basis is the sigma^x eigenbasis with bit 0 = |+>, bit 1 = |->";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FullHamiltonian {
    /// `−J Σ σ^z_i σ^z_{i+1} − B Σ σ^x_i`.
    Ising,
    /// The same with only the flip-conserving hopping kept:
    /// `−J Σ (σ^{-+}_i σ^{+-}_{i+1} + h.c.) − B Σ σ^x_i`.
    IsingRwa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// `|++⋯+⟩`.
    GroundAllPlus,
    /// `|−+⋯+⟩`.
    FirstSpinFlipped,
}

impl InitialState {
    pub fn basis_index(self, n_sites: usize) -> usize {
        match self {
            InitialState::GroundAllPlus => 0,
            InitialState::FirstSpinFlipped => flip_index(n_sites, 1),
        }
    }
}

/// Basis index of the state with only spin `site` (1-based) flipped.
pub fn flip_index(n_sites: usize, site: usize) -> usize {
    debug_assert!((1..=n_sites).contains(&site));
    1 << (n_sites - site)
}

fn check_sites(n: usize, max: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFewSites(n));
    }
    if n > max {
        return Err(Error::DimensionCap { n, max });
    }
    Ok(())
}

pub fn hamiltonian(kind: FullHamiltonian, n_sites: usize, coupling: f64, field: f64) -> Result<DMatrix<f64>> {
    check_sites(n_sites, MAX_FULL_SITES)?;
    let dim = 1usize << n_sites;
    let mut h = DMatrix::zeros(dim, dim);
    for state in 0..dim {
        let flipped = state.count_ones() as f64;
        h[(state, state)] = -field * (n_sites as f64 - 2.0 * flipped);
        for bond in 0..n_sites - 1 {
            let pair = 0b11usize << (n_sites - 2 - bond);
            let bits = state & pair;
            let mixed = bits != 0 && bits != pair;
            if kind == FullHamiltonian::Ising || mixed {
                h[(state ^ pair, state)] += -coupling;
            }
        }
    }
    Ok(h)
}

/// Dense eigen-decomposition of a full Hamiltonian, reusable across times.
#[derive(Debug, Clone)]
pub struct FullPropagator {
    n_sites: usize,
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl FullPropagator {
    pub fn new(kind: FullHamiltonian, n_sites: usize, coupling: f64, field: f64) -> Result<Self> {
        let h = hamiltonian(kind, n_sites, coupling, field)?;
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let energies = DVector::from_iterator(order.len(), order.iter().map(|&k| eig.eigenvalues[k]));
        let vectors = eig.eigenvectors.select_columns(&order);
        Ok(Self { n_sites, energies, vectors })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Eigenvalues in ascending order.
    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    /// Eigenvectors as columns, matching [`Self::energies`].
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// `e^{−iHt}` applied to a basis state.
    pub fn evolve_basis_state(&self, index: usize, t: f64) -> Vec<Complex64> {
        let v = &self.vectors;
        let weights: Vec<Complex64> = (0..v.ncols())
            .map(|k| {
                let (s, c) = (self.energies[k] * t).sin_cos();
                Complex64::new(c, -s) * v[(index, k)]
            })
            .collect();
        (0..v.nrows())
            .map(|i| weights.iter().enumerate().map(|(k, w)| w * v[(i, k)]).sum())
            .collect()
    }
}

/// A state vector in the full Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    pub n_sites: usize,
    pub time: f64,
    pub amplitudes: Vec<Complex64>,
}

impl FullState {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Amplitude on `|n⟩`, the state with only spin `site` flipped.
    pub fn flip_amplitude(&self, site: usize) -> Complex64 {
        self.amplitudes[flip_index(self.n_sites, site)]
    }

    /// Total weight in the single-flip sector.
    pub fn single_flip_weight(&self) -> f64 {
        (1..=self.n_sites).map(|m| self.flip_amplitude(m).norm_sqr()).sum()
    }
}

/// Exact evolution under the full (non-RWA) Ising Hamiltonian.
pub fn evolve_full(spec: &ChainSpec, t: f64, initial: InitialState) -> Result<FullState> {
    if spec.model != Model::IsingFull {
        return Err(Error::UnsupportedModel { model: spec.model, op: "evolve_full" });
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be finite and non-negative, got {t}")));
    }
    let prop = FullPropagator::new(FullHamiltonian::Ising, spec.n_sites, spec.coupling, spec.field)?;
    Ok(FullState {
        n_sites: spec.n_sites,
        time: t,
        amplitudes: prop.evolve_basis_state(initial.basis_index(spec.n_sites), t),
    })
}

/// One field ratio of the RWA-versus-full comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralRow {
    pub field_ratio: f64,
    pub full_energies: Vec<f64>,
    pub rwa_energies: Vec<f64>,
    /// Ground, first-excited and second-excited state overlaps.
    pub overlaps: [f64; 3],
}

/// Spectra of both Hamiltonians and low-lying state overlaps for each `B/J`.
///
/// Levels are matched by energy order. When a level is degenerate, the
/// overlap is the cosine of the largest principal angle between the two
/// degenerate subspaces.
pub fn rwa_spectral_comparison(n_sites: usize, coupling: f64, field_ratios: &[f64]) -> Result<Vec<SpectralRow>> {
    check_sites(n_sites, MAX_COMPARISON_SITES)?;
    if !(coupling.is_finite() && coupling > 0.0) {
        return Err(Error::InvalidArgument(format!("coupling must be positive, got {coupling}")));
    }
    field_ratios
        .iter()
        .map(|&ratio| {
            if !(ratio.is_finite() && ratio >= 0.0) {
                return Err(Error::InvalidArgument(format!("field ratio must be non-negative, got {ratio}")));
            }
            let field = ratio * coupling;
            let full = FullPropagator::new(FullHamiltonian::Ising, n_sites, coupling, field)?;
            let rwa = FullPropagator::new(FullHamiltonian::IsingRwa, n_sites, coupling, field)?;
            let overlaps = [0, 1, 2].map(|level| level_overlap(&full, &rwa, level));
            Ok(SpectralRow {
                field_ratio: ratio,
                full_energies: full.energies.iter().copied().collect(),
                rwa_energies: rwa.energies.iter().copied().collect(),
                overlaps,
            })
        })
        .collect()
}

/// Indices of the levels degenerate with `level` (sorted spectrum).
fn cluster(energies: &DVector<f64>, level: usize) -> std::ops::Range<usize> {
    let e0 = energies[level];
    let close = |e: f64| (e - e0).abs() <= 1e-9 * (1.0 + e0.abs());
    let mut lo = level;
    while lo > 0 && close(energies[lo - 1]) {
        lo -= 1;
    }
    let mut hi = level + 1;
    while hi < energies.len() && close(energies[hi]) {
        hi += 1;
    }
    lo..hi
}

fn level_overlap(a: &FullPropagator, b: &FullPropagator, level: usize) -> f64 {
    let ca: Vec<usize> = cluster(&a.energies, level).collect();
    let cb: Vec<usize> = cluster(&b.energies, level).collect();
    let ua = a.vectors.select_columns(&ca);
    let ub = b.vectors.select_columns(&cb);
    let m = ua.transpose() * ub;
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].abs().min(1.0);
    }
    let sv = m.singular_values();
    sv.iter().copied().fold(f64::INFINITY, f64::min).min(1.0)
}
