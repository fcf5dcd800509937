use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tfic::analysis::{
    detect_switch, fit_power_law, peak_table, scan_startup_many, select_peaks, velocity, Horizon, Peak, PeakFit, PeakOrder,
    ScanGrid, StartupScan, Target, Velocity, MIN_SWITCH_ENTRIES,
};
use tfic::chain::ChainSpec;
use tfic::full::{rwa_spectral_comparison, FullHamiltonian, FullPropagator, InitialState, BASIS_ORDERING};
use tfic::measures::sample_all;
use tfic::{Measure, Model};

use crate::config::{CommandKind, RunConfig};
use crate::output::{to_pretty, Cell, Table, Writer, TOOL};
use crate::CliError;

/// What a command produced.
pub struct Outcome {
    pub files: Vec<std::path::PathBuf>,
    /// Results are incomplete (exit status 4).
    pub partial: Vec<String>,
    /// Informational warnings (exit status unaffected).
    pub notes: Vec<String>,
}

pub fn run_command(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut writer = Writer::new(config)?;
    let mut partial = Vec::new();
    let mut notes = Vec::new();
    match config.command {
        CommandKind::Evolve => evolve(config, &mut writer)?,
        CommandKind::Scan | CommandKind::Heisenberg => scan(config, &mut writer, &mut partial, &mut notes)?,
        CommandKind::Peaks => peaks(config, &mut writer, &mut partial)?,
        CommandKind::ValidateRwa => validate_rwa(config, &mut writer)?,
    }
    Ok(Outcome { files: writer.written, partial, notes })
}

fn chain(config: &RunConfig, n: usize) -> Result<ChainSpec, CliError> {
    Ok(ChainSpec::new(config.model, n, config.coupling, config.field)?)
}

fn time_grid(dt: f64, t_max: f64) -> Vec<f64> {
    let steps = (t_max / dt * (1.0 + 1e-12)).floor() as usize;
    (0..=steps).map(|i| i as f64 * dt).collect()
}

fn evolve(config: &RunConfig, writer: &mut Writer) -> Result<(), CliError> {
    let n = config.n_sites[0];
    let spec = chain(config, n)?;
    let times = time_grid(config.dt, config.t_max_for(n));
    let stem = format!("evolve_{}_N{n}", config.model);

    if config.model == Model::IsingFull {
        // Beyond one excitation the end-pair formulas do not apply; dump the state.
        let prop = FullPropagator::new(FullHamiltonian::Ising, n, spec.coupling, spec.field)?;
        let start = InitialState::FirstSpinFlipped.basis_index(n);
        let mut table = Table::new(&["time", "index", "re", "im"]);
        table.notes.push(format!("basis: {BASIS_ORDERING}"));
        table.notes.push(format!("initial state index: {start} (spin 1 flipped)"));
        for &t in &times {
            for (i, a) in prop.evolve_basis_state(start, t).iter().enumerate() {
                table.push(vec![t.into(), i.into(), a.re.into(), a.im.into()]);
            }
        }
        return writer.table(&format!("{stem}_state"), &table);
    }

    let samples = sample_all(&spec, &times)?;
    let mut table = Table::new(&["time", "cf_zz", "cf_xx", "mi", "cc", "qd", "eof"]);
    table.notes.push(format!(
        "requested measures: {}",
        config.measures.iter().map(|m| m.name()).collect::<Vec<_>>().join(",")
    ));
    for s in samples {
        table.push(vec![s.time.into(), s.cf_zz.into(), s.cf_xx.into(), s.mi.into(), s.cc.into(), s.qd.into(), s.eof.into()]);
    }
    writer.table(&stem, &table)
}

/// One analysed start-up scan as stored in the JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub scan: StartupScan,
    pub velocities: Vec<Velocity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub scans: Vec<ScanReport>,
    pub warnings: Vec<String>,
}

pub fn analyse_scan(scan: StartupScan, warnings: &mut Vec<String>, partial: &mut Vec<String>) -> Result<ScanReport, CliError> {
    let label = format!("{} delta={:e}", scan.measure, scan.criterion);
    if !scan.excluded.is_empty() {
        partial.push(format!("{label}: {} chain lengths never reached the criterion: {:?}", scan.excluded.len(), scan.excluded));
    }
    if scan.entries.len() < MIN_SWITCH_ENTRIES {
        partial.push(format!("{label}: only {} arrivals, switch detection skipped", scan.entries.len()));
        return Ok(ScanReport { scan, velocities: Vec::new() });
    }
    let scan = detect_switch(scan)?;
    if scan.jumps.len() > 1 {
        warnings.push(format!(
            "{label}: {} jumps above threshold at N = {:?}",
            scan.jumps.len(),
            scan.jumps.iter().map(|&i| scan.entries[i].0).collect::<Vec<_>>()
        ));
    }
    let velocities = (0..scan.segment_fits.len()).map(|k| velocity(&scan, k)).collect::<Result<Vec<_>, _>>()?;
    for (k, v) in velocities.iter().enumerate() {
        if !v.reliable {
            warnings.push(format!("{label}: segment {k} velocity {} is unreliable", v.value));
        }
    }
    Ok(ScanReport { scan, velocities })
}

fn scan(config: &RunConfig, writer: &mut Writer, partial: &mut Vec<String>, notes: &mut Vec<String>) -> Result<(), CliError> {
    let template = chain(config, 2)?;
    let targets: Vec<Target> = config
        .measures
        .iter()
        .flat_map(|&measure| config.deltas.iter().map(move |&criterion| Target { measure, criterion }))
        .collect();
    let horizon = match config.t_max {
        Some(t) => Horizon::Fixed(t),
        None => Horizon::PerSite(config.t_max_per_site),
    };
    let grid = ScanGrid { dt: config.dt, horizon };
    let scans = scan_startup_many(&template, &targets, &config.n_sites, grid)?;

    let prefix = if config.command == CommandKind::Heisenberg { "heisenberg" } else { "scan" };
    let mut reports = Vec::new();
    let mut info = Vec::new();
    for scan in scans {
        let mut table = Table::new(&["n_sites", "startup_time"]);
        for &(n, t) in &scan.entries {
            table.push(vec![n.into(), t.into()]);
        }
        if !scan.excluded.is_empty() {
            table.notes.push(format!("no arrival within the window for N = {:?}", scan.excluded));
        }
        writer.table(&format!("{prefix}_{}_delta{:e}", scan.measure, scan.criterion), &table)?;
        reports.push(analyse_scan(scan, &mut info, partial)?);
    }
    let warnings: Vec<String> = partial.iter().chain(&info).cloned().collect();
    notes.extend(info);
    writer.summary(&format!("{prefix}_summary.json"), &ScanSummary { scans: reports, warnings })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakRecord {
    pub measure: Measure,
    pub n_sites: usize,
    pub peaks: Vec<Peak>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakSummary {
    pub fits: Vec<PeakFit>,
    pub peaks: Vec<PeakRecord>,
    pub warnings: Vec<String>,
}

fn peaks(config: &RunConfig, writer: &mut Writer, partial: &mut Vec<String>) -> Result<(), CliError> {
    let template = chain(config, 3)?;
    let horizon = match config.t_max {
        Some(t) => Horizon::Fixed(t),
        None => Horizon::PerSite(config.t_max_per_site),
    };
    let mut fits = Vec::new();
    let mut records = Vec::new();
    for &measure in &config.measures {
        let table = peak_table(&template, measure, &config.n_sites, config.dt, horizon, config.peaks)?;
        let mut csv = Table::new(&["n_sites", "peak", "time", "value"]);
        for (n, found) in &table {
            for (k, p) in found.iter().enumerate() {
                csv.push(vec![(*n).into(), (k + 1).into(), p.time.into(), p.value.into()]);
            }
            if found.len() < config.peaks {
                partial.push(format!("{measure} N={n}: found {} of {} peaks", found.len(), config.peaks));
            }
            records.push(PeakRecord { measure, n_sites: *n, peaks: found.clone() });
        }
        writer.table(&format!("peaks_{measure}"), &csv)?;

        for order in [PeakOrder::First, PeakOrder::Second].into_iter().take(config.peaks.min(2)) {
            let (samples, skipped) = select_peaks(&table, order);
            match fit_power_law(measure, order, samples, skipped) {
                Ok(fit) => fits.push(fit),
                Err(e) => partial.push(format!("{measure} {order:?} peak fit: {e}")),
            }
        }
    }
    writer.summary("peaks_summary.json", &PeakSummary { fits, peaks: records, warnings: partial.clone() })
}

fn validate_rwa(config: &RunConfig, writer: &mut Writer) -> Result<(), CliError> {
    let n = config.n_sites[0];
    let ratios = config.ratios.expect("validate-rwa always has a ratio sweep").values();
    let rows = rwa_spectral_comparison(n, config.coupling, &ratios)?;
    let dim = 1usize << n;
    let mut columns = vec!["field_ratio".to_string(), "overlap_ground".into(), "overlap_first".into(), "overlap_second".into()];
    columns.extend((0..dim).map(|k| format!("full_e{k}")));
    columns.extend((0..dim).map(|k| format!("rwa_e{k}")));
    let mut table = Table::new(&columns.iter().map(String::as_str).collect::<Vec<_>>());
    table.notes.push("energies in units of J, ascending".into());
    for r in rows {
        let mut row: Vec<Cell> = vec![r.field_ratio.into()];
        row.extend(r.overlaps.iter().map(|&o| Cell::from(o)));
        row.extend(r.full_energies.iter().map(|&e| Cell::from(e)));
        row.extend(r.rwa_energies.iter().map(|&e| Cell::from(e)));
        table.push(row);
    }
    writer.table(&format!("validate_rwa_N{n}"), &table)
}

#[derive(Debug, Serialize)]
pub struct RefitReport {
    pub tool: &'static str,
    pub source: String,
    pub matches_input: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scans: Option<Vec<ScanReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fits: Option<Vec<PeakFit>>,
}

/// Recomputes switch detection and segment fits, or peak power laws, from
/// the data stored in a summary file.
pub fn refit(summary: &Path) -> Result<RefitReport, CliError> {
    let text = fs::read_to_string(summary).map_err(|e| CliError::Config(format!("{}: {e}", summary.display())))?;
    let doc: BTreeMap<String, serde_json::Value> =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", summary.display())))?;
    let parse_err = |e: serde_json::Error| CliError::Config(format!("{}: {e}", summary.display()));
    let source = summary.display().to_string();

    if let Some(scans) = doc.get("scans") {
        let stored: Vec<ScanReport> = serde_json::from_value(scans.clone()).map_err(parse_err)?;
        let mut fresh = Vec::new();
        for report in &stored {
            let mut scan = report.scan.clone();
            scan.switch_index = None;
            scan.jumps.clear();
            scan.segment_fits.clear();
            fresh.push(analyse_scan(scan, &mut Vec::new(), &mut Vec::new())?);
        }
        return Ok(RefitReport { tool: TOOL, source, matches_input: fresh == stored, scans: Some(fresh), fits: None });
    }
    if let Some(fits) = doc.get("fits") {
        let stored: Vec<PeakFit> = serde_json::from_value(fits.clone()).map_err(parse_err)?;
        let fresh = stored
            .iter()
            .map(|f| fit_power_law(f.measure, f.peak_order, f.samples.clone(), f.skipped.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(RefitReport { tool: TOOL, source, matches_input: fresh == stored, scans: None, fits: Some(fresh) });
    }
    Err(CliError::Config(format!("{source}: neither `scans` nor `fits` found")))
}

pub fn write_refit(report: &RefitReport, output: &Path) -> Result<std::path::PathBuf, CliError> {
    fs::create_dir_all(output).map_err(|e| CliError::Config(format!("--output {}: {e}", output.display())))?;
    let path = output.join("refit_summary.json");
    crate::output::write_file(&path, &to_pretty(report)?)?;
    Ok(path)
}
