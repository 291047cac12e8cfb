//! The subcommands. Each writes its CSV files (with sidecars) into the output
//! directory, then reports tolerance failures, so a failing run still leaves
//! its data behind for inspection.

use std::path::{Path, PathBuf};

use rabishift::basis::level_offset;
use rabishift::dynamics::{evaluate_series, SeriesOptions, SpectralPropagator};
use rabishift::multiphoton::{two_sector_study, Parity, TwoSectorRunOptions};
use rabishift::refmodels::{
    three_level_populations_closed, three_level_quasienergies_linear, ThreeLevelPropagator,
};
use rabishift::spectral::{
    build_active_poles, identify_branches, solve_quasienergies, QuasiEnergySpectrum,
};
use rabishift::SystemParams;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{RunConfig, Sector};
use crate::error::CliError;
use crate::output::{col, fmt_f64, Column, CsvTable};

/// `|1 − Σ b_m²|` allowed for a one-photon spectrum.
pub const CLOSURE_TOL: f64 = 1e-9;
/// `max |1 − total probability|` allowed along a trajectory.
pub const UNITARITY_TOL: f64 = 1e-9;
/// Relative energy drift allowed along a two-photon trajectory.
pub const ENERGY_DRIFT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Dynamics,
    TwoPhoton,
    ThreeLevel,
    Sweep,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Dynamics => "dynamics",
            Command::TwoPhoton => "twophoton",
            Command::ThreeLevel => "threelevel",
            Command::Sweep => "sweep",
        }
    }
}

/// Files written by a run plus any tolerance failures found on the way.
#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
}

impl Report {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn into_result(self) -> Result<Vec<PathBuf>, CliError> {
        if self.failures.is_empty() {
            Ok(self.files)
        } else {
            Err(CliError::Tolerance(self.failures))
        }
    }
}

/// Runs `command` for `config`, writing into `out` (created if missing).
pub fn execute(command: Command, config: &RunConfig, out: &Path) -> Result<Report, CliError> {
    config.validate()?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut report = Report::default();
    let name = command.as_str();
    match command {
        Command::Spectrum => {
            let spectra = solve_spectra(config)?;
            write_spectrum(name, config, out, &spectra, &mut report)?;
        }
        Command::Dynamics => {
            let spectra = solve_spectra(config)?;
            write_dynamics(name, config, out, &spectra, &mut report)?;
        }
        Command::TwoPhoton => two_photon(name, config, out, &mut report)?,
        Command::ThreeLevel => three_level(name, config, out, &mut report)?,
        Command::Sweep => {
            for sector in &config.sectors {
                match sector {
                    Sector::OnePhoton => {
                        let spectra = solve_spectra(config)?;
                        write_spectrum(name, config, out, &spectra, &mut report)?;
                        write_dynamics(name, config, out, &spectra, &mut report)?;
                    }
                    Sector::TwoPhoton => two_photon(name, config, out, &mut report)?,
                    Sector::ThreeLevel => three_level(name, config, out, &mut report)?,
                }
            }
        }
    }
    Ok(report)
}

/// One-photon spectrum at one detuning.
pub struct OnePhotonPoint {
    pub detuning: f64,
    pub params: SystemParams,
    pub spectrum: QuasiEnergySpectrum,
}

/// Solves every detuning of `config` in parallel; output order follows the
/// config.
pub fn solve_spectra(config: &RunConfig) -> Result<Vec<OnePhotonPoint>, CliError> {
    let points = config
        .detunings_ev()
        .into_par_iter()
        .map(|detuning| {
            let params = config.params(detuning);
            let spectrum = solve_quasienergies(&build_active_poles(&params)?)?;
            Ok(OnePhotonPoint {
                detuning,
                params,
                spectrum,
            })
        })
        .collect::<Result<Vec<_>, rabishift::Error>>()?;
    Ok(points)
}

const QUASIENERGY_COLUMNS: &[Column] = &[
    col("detuning_eV", "eV", "photon detuning ħω − ε₀"),
    col("index", "", "root index m, ascending energy"),
    col("lambda_eV", "eV", "quasi-energy λ_m − ε₀"),
    col(
        "anchor",
        "",
        "index of the pole the root is measured from (empty: none)",
    ),
    col(
        "tau_eV",
        "eV",
        "λ_m − pole[anchor], or λ_m − ε₀ without anchor",
    ),
    col("weight", "", "b_m², weight of the initial photon state"),
    col("branch", "", "lower | upper-star | background"),
    col("overlay_lower_eV", "eV", "two-level lower polariton − ε₀"),
    col("overlay_upper_eV", "eV", "two-level upper polariton − ε₀"),
];

const WEIGHT_COLUMNS: &[Column] = &[
    col("detuning_eV", "eV", "photon detuning ħω − ε₀"),
    col("index", "", "root index m in quasienergies.csv"),
    col("lambda_eV", "eV", "quasi-energy λ_m − ε₀"),
    col(
        "weight",
        "",
        "b_m², only roots at or above the weight cutoff",
    ),
    col("branch", "", "lower | upper-star | background"),
];

fn write_spectrum(
    command: &str,
    config: &RunConfig,
    out: &Path,
    points: &[OnePhotonPoint],
    report: &mut Report,
) -> Result<(), CliError> {
    let mut roots = CsvTable::create(out, "quasienergies.csv", QUASIENERGY_COLUMNS)?;
    let mut weights = CsvTable::create(out, "weights.csv", WEIGHT_COLUMNS)?;
    let mut summary = Vec::new();
    for p in points {
        let spec = &p.spectrum;
        let br = identify_branches(spec);
        let d = fmt_f64(p.detuning);
        let (lo, hi) = (fmt_f64(br.overlay.lower), fmt_f64(br.overlay.upper));
        let mut kept = 0usize;
        for (m, r) in spec.roots.iter().enumerate() {
            let (index, lambda, weight) = (m.to_string(), fmt_f64(r.offset), fmt_f64(r.weight));
            let anchor = r.anchor.map(|a| a.to_string()).unwrap_or_default();
            roots.row([
                &d,
                &index,
                &lambda,
                &anchor,
                &fmt_f64(r.tau),
                &weight,
                r.branch.as_str(),
                &lo,
                &hi,
            ])?;
            if r.weight >= config.weight_cutoff {
                weights.row([&d, &index, &lambda, &weight, r.branch.as_str()])?;
                kept += 1;
            }
        }
        let closure = spec.weight_closure_defect();
        let interlacing = spec.interlacing_holds();
        report.check(closure.abs() <= CLOSURE_TOL, || {
            format!(
                "δ = {:e} eV: weight closure defect {closure:e} exceeds {CLOSURE_TOL:e}",
                p.detuning
            )
        });
        report.check(interlacing, || {
            format!("δ = {:e} eV: roots do not interlace the poles", p.detuning)
        });
        let max_residual = (0..spec.roots.len())
            .map(|m| spec.residual(m))
            .fold(0.0, f64::max);
        summary.push(json!({
            "detuning_eV": p.detuning,
            "coupling_g_eV": p.params.coupling_g,
            "photon_energy_eV": p.params.photon_energy,
            "lowest_level_eV": p.params.lowest_level(),
            "roots": spec.roots.len(),
            "distinct_poles": spec.poles.len(),
            "silent_levels": spec.silent_levels.iter().map(|s| s.1).sum::<usize>(),
            "roots_above_cutoff": kept,
            "weight_closure_defect": closure,
            "interlacing": interlacing,
            "max_secular_residual": max_residual,
            "lower_index": br.lower,
            "upper_star_index": br.upper_star,
            "overlay": br.overlay,
        }));
    }
    let summary = json!({ "weight_cutoff": config.weight_cutoff, "detunings": summary });
    report
        .files
        .push(roots.finish(command, config, summary.clone())?);
    report.files.push(weights.finish(command, config, summary)?);
    Ok(())
}

const POPULATION_COLUMNS: &[Column] = &[
    col("detuning_eV", "eV", "photon detuning ħω − ε₀"),
    col("t_ns", "ns", "time"),
    col("exciton_total", "", "total exciton population"),
    col(
        "collective_pop",
        "",
        "population of the collective symmetric exciton",
    ),
    col("residual", "", "exciton_total − collective_pop"),
    col("photon_pop", "", "photon population"),
    col(
        "checksum",
        "",
        "1 − total probability (weight-closure defect on the completeness route)",
    ),
];

const MODE_COLUMNS: &[Column] = &[
    col("detuning_eV", "eV", "photon detuning ħω − ε₀"),
    col("t_ns", "ns", "time"),
    col("mode", "", "k for a chain, kx:ky for a well"),
    col("abs_amplitude", "", "|C_k(t)|"),
];

fn write_dynamics(
    command: &str,
    config: &RunConfig,
    out: &Path,
    points: &[OnePhotonPoint],
    report: &mut Report,
) -> Result<(), CliError> {
    let grid = config.time_grid.build()?;
    let opts = SeriesOptions {
        window: config.mode_window,
        population_threshold: config.population_threshold,
        force_mode_sum: false,
    };
    let mut pops = CsvTable::create(out, "populations.csv", POPULATION_COLUMNS)?;
    let mut modes = CsvTable::create(out, "modes.csv", MODE_COLUMNS)?;
    let mut summary = Vec::new();
    for p in points {
        let s = evaluate_series(&p.spectrum, &grid, &opts)?;
        let d = fmt_f64(p.detuning);
        let labels: Vec<String> = s.mode_labels.iter().map(|l| l.to_string()).collect();
        for (i, &t) in s.times.iter().enumerate() {
            let t = fmt_f64(t);
            pops.row([
                d.clone(),
                t.clone(),
                fmt_f64(s.exciton_total[i]),
                fmt_f64(s.collective_pop[i]),
                fmt_f64(s.residual[i]),
                fmt_f64(s.photon_pop[i]),
                fmt_f64(s.checksum[i]),
            ])?;
            for (label, &a) in labels.iter().zip(&s.mode_magnitudes[i]) {
                modes.row([&d, &t, label, &fmt_f64(a)])?;
            }
        }
        let max_checksum = s.checksum.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        report.check(max_checksum <= UNITARITY_TOL, || {
            format!(
                "δ = {:e} eV: probability checksum {max_checksum:e} exceeds {UNITARITY_TOL:e}",
                p.detuning
            )
        });
        let prop = SpectralPropagator::new(&p.spectrum);
        summary.push(json!({
            "detuning_eV": p.detuning,
            "exciton_total_method": s.method,
            "kept_roots": prop.kept_roots(),
            "dropped_weight": prop.dropped_weight(),
            "max_abs_checksum": max_checksum,
            "max_exciton_total": s.exciton_total.iter().copied().fold(0.0, f64::max),
            "max_residual": s.residual.iter().copied().fold(0.0, f64::max),
            "exported_modes": labels,
        }));
    }
    let summary = json!({ "time_points": grid.times.len(), "detunings": summary });
    report
        .files
        .push(pops.finish(command, config, summary.clone())?);
    report.files.push(modes.finish(command, config, summary)?);
    Ok(())
}

const SPECTRUM2_COLUMNS: &[Column] = &[
    col("detuning_eV", "eV", "photon detuning ħω − ε₀"),
    col("index", "", "level index, ascending energy"),
    col(
        "energy_eV",
        "eV",
        "quasi-energy relative to 2ħω (the energy of |2 photons; 0⟩)",
    ),
    col("energy_from_2e0_eV", "eV", "quasi-energy relative to 2ε₀"),
    col("weight", "", "weight of |2 photons; 0⟩"),
    col("parity", "", "chain-reflection parity (even | odd)"),
];

const POPULATION2_COLUMNS: &[Column] = &[
    col("detuning_eV", "eV", "photon detuning ħω − ε₀"),
    col("t_ns", "ns", "time"),
    col("vacuum", "", "population of |2 photons; 0⟩"),
    col(
        "exciton_total",
        "",
        "one-exciton (one photon left) population",
    ),
    col("biexciton_total", "", "two-exciton (no photon) population"),
    col(
        "collective_exciton",
        "",
        "population of the collective symmetric exciton",
    ),
    col(
        "collective_biexciton",
        "",
        "population of the collective two-exciton state",
    ),
    col("exciton_residual", "", "exciton_total − collective_exciton"),
    col(
        "biexciton_residual",
        "",
        "biexciton_total − collective_biexciton",
    ),
    col("unitarity_defect", "", "1 − ‖ψ‖²"),
    col(
        "energy_drift",
        "",
        "|⟨H⟩(t) − ⟨H⟩(0)| relative to the energy scale of the initial state",
    ),
];

const PROJECTION2_COLUMNS: &[Column] = &[
    col("detuning_eV", "eV", "photon detuning ħω − ε₀"),
    col("state", "", "vacuum | exciton | biexciton"),
    col("k1", "", "exciton mode (first mode of a biexciton)"),
    col("k2", "", "second biexciton mode"),
    col("energy_eV", "eV", "free-state energy relative to 2ħω"),
    col(
        "population",
        "",
        "population averaged over the averaging window",
    ),
];

fn two_photon(
    command: &str,
    config: &RunConfig,
    out: &Path,
    report: &mut Report,
) -> Result<(), CliError> {
    let grid = config.time_grid.build()?;
    let tp = &config.two_photon;
    let opts = TwoSectorRunOptions {
        force_krylov: tp.force_krylov,
        average_until: tp.average_until,
        max_projection_samples: tp.max_projection_samples,
        ..Default::default()
    };
    let runs = config
        .detunings_ev()
        .into_par_iter()
        .map(|d| {
            let params = config.params(d);
            let (spectrum, run) =
                two_sector_study(&params, &grid.times, &opts, Some(tp.lanczos_steps))?;
            let (spectrum, method) = spectrum.expect("spectrum requested");
            Ok((d, params, spectrum, method, run))
        })
        .collect::<Result<Vec<_>, rabishift::Error>>()?;

    let mut spec_csv = CsvTable::create(out, "spectrum2.csv", SPECTRUM2_COLUMNS)?;
    let mut pop_csv = CsvTable::create(out, "populations2.csv", POPULATION2_COLUMNS)?;
    let mut proj_csv = CsvTable::create(out, "projections2.csv", PROJECTION2_COLUMNS)?;
    let mut summary = Vec::new();
    for (d, params, spectrum, method, run) in &runs {
        let ds = fmt_f64(*d);
        let mut levels = spectrum.levels.clone();
        levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        for (i, l) in levels.iter().enumerate() {
            let parity = match l.parity {
                Parity::Even => "even",
                Parity::Odd => "odd",
            };
            spec_csv.row([
                ds.clone(),
                i.to_string(),
                fmt_f64(l.energy),
                fmt_f64(l.energy + 2.0 * d),
                fmt_f64(l.weight),
                parity.to_string(),
            ])?;
        }
        for (i, o) in run.observables.iter().enumerate() {
            pop_csv.row([
                ds.clone(),
                fmt_f64(run.times[i]),
                fmt_f64(o.vacuum),
                fmt_f64(o.exciton_total),
                fmt_f64(o.biexciton_total),
                fmt_f64(o.collective_exciton),
                fmt_f64(o.collective_biexciton),
                fmt_f64(o.exciton_residual()),
                fmt_f64(o.biexciton_residual()),
                fmt_f64(run.unitarity_defect[i]),
                fmt_f64(run.energy_drift[i]),
            ])?;
        }
        if run.projection_samples > 0 {
            let n = run.n_sites;
            let off: Vec<f64> = (1..=n).map(|k| level_offset(k, n, params.hop_w)).collect();
            let proj = &run.averaged_projection;
            proj_csv.row([
                ds.as_str(),
                "vacuum",
                "",
                "",
                &fmt_f64(0.0),
                &fmt_f64(proj.vacuum),
            ])?;
            for (k, &pop) in proj.excitons.iter().enumerate() {
                let e = off[k] - d;
                proj_csv.row([
                    ds.as_str(),
                    "exciton",
                    &(k + 1).to_string(),
                    "",
                    &fmt_f64(e),
                    &fmt_f64(pop),
                ])?;
            }
            let mut p = 0;
            for k1 in 1..n {
                for k2 in k1 + 1..=n {
                    let e = off[k1 - 1] + off[k2 - 1] - 2.0 * d;
                    let (a, b) = (k1.to_string(), k2.to_string());
                    proj_csv.row([
                        ds.as_str(),
                        "biexciton",
                        &a,
                        &b,
                        &fmt_f64(e),
                        &fmt_f64(proj.biexcitons[p]),
                    ])?;
                    p += 1;
                }
            }
        }
        let weight_sum = spectrum.weight_sum();
        report.check((weight_sum - 1.0).abs() <= CLOSURE_TOL, || {
            format!("δ = {d:e} eV: two-photon weights sum to {weight_sum}")
        });
        let (unit, drift) = (run.max_unitarity_defect(), run.max_energy_drift());
        report.check(unit <= UNITARITY_TOL, || {
            format!("δ = {d:e} eV: unitarity defect {unit:e} exceeds {UNITARITY_TOL:e}")
        });
        report.check(drift <= ENERGY_DRIFT_TOL, || {
            format!("δ = {d:e} eV: energy drift {drift:e} exceeds {ENERGY_DRIFT_TOL:e}")
        });
        summary.push(json!({
            "detuning_eV": d,
            "n_sites": run.n_sites,
            "spectrum_method": method,
            "propagation_method": run.method,
            "levels": levels.len(),
            "weight_sum": weight_sum,
            "max_unitarity_defect": unit,
            "max_energy_drift": drift,
            "max_biexciton": run.max_biexciton(),
            "min_vacuum": run.min_vacuum(),
            "projection_samples": run.projection_samples,
            "projection_total": run.averaged_projection.total(),
            "krylov": run.krylov,
        }));
    }
    let summary = json!({ "time_points": grid.times.len(), "detunings": summary });
    report
        .files
        .push(spec_csv.finish(command, config, summary.clone())?);
    report
        .files
        .push(pop_csv.finish(command, config, summary.clone())?);
    report
        .files
        .push(proj_csv.finish(command, config, summary)?);
    Ok(())
}

const THREE_LEVEL_COLUMNS: &[Column] = &[
    col("delta_eV", "eV", "photon detuning δ"),
    col("t_ns", "ns", "time"),
    col(
        "c0_closed",
        "",
        "closed-form |C₀|² (NaN outside δ = 0, Δ = g, μ ≤ 0.1)",
    ),
    col("c1_closed", "", "closed-form |C₁|², main level"),
    col("c2_closed", "", "closed-form |C₂|², upper level"),
    col("c0_exact", "", "|C₀|² from exact 3×3 propagation"),
    col("c1_exact", "", "|C₁|² from exact 3×3 propagation"),
    col("c2_exact", "", "|C₂|² from exact 3×3 propagation"),
    col("deviation", "", "max over levels of |closed − exact|"),
];

fn three_level(
    command: &str,
    config: &RunConfig,
    out: &Path,
    report: &mut Report,
) -> Result<(), CliError> {
    let grid = config.time_grid.build()?;
    let mut csv = CsvTable::create(out, "threelevel.csv", THREE_LEVEL_COLUMNS)?;
    let mut summary = Vec::new();
    for d in config.detunings_ev() {
        let p = config.three_level_params(d)?;
        let prop = ThreeLevelPropagator::new(&p)?;
        let closed_ok = p.delta == 0.0
            && (p.upper_offset - p.g).abs() <= 1e-12 * p.g.abs()
            && p.closed_form_valid();
        let ds = fmt_f64(d);
        let (mut max_dev, mut max_c2_closed, mut max_c2_exact, mut max_closure) =
            (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for &t in &grid.times {
            let exact = prop.populations(t);
            let closed = if closed_ok {
                three_level_populations_closed(p.g, p.mu, t)
            } else {
                [f64::NAN; 3]
            };
            let dev = if closed_ok {
                (0..3)
                    .map(|k| (exact[k] - closed[k]).abs())
                    .fold(0.0, f64::max)
            } else {
                f64::NAN
            };
            if closed_ok {
                max_dev = max_dev.max(dev);
                max_c2_closed = max_c2_closed.max(closed[2]);
            }
            max_c2_exact = max_c2_exact.max(exact[2]);
            max_closure = max_closure.max((exact.iter().sum::<f64>() - 1.0).abs());
            let mut row = vec![ds.clone(), fmt_f64(t)];
            row.extend(closed.iter().chain(&exact).map(|&x| fmt_f64(x)));
            row.push(fmt_f64(dev));
            csv.row(row)?;
        }
        report.check(max_closure <= 1e-10, || {
            format!("δ = {d:e} eV: three-level probability closure {max_closure:e}")
        });
        summary.push(json!({
            "delta_eV": d,
            "params": p,
            "quasienergies_exact_eV": prop.quasienergies(),
            "quasienergies_linear_eV": closed_ok.then(|| three_level_quasienergies_linear(p.g, p.mu)),
            "closed_form_columns": closed_ok,
            "max_c2_closed": closed_ok.then_some(max_c2_closed),
            "max_c2_exact": max_c2_exact,
            "max_deviation": closed_ok.then_some(max_dev),
            "time_averaged_exact": prop.time_averaged_populations(),
        }));
    }
    let summary = json!({ "time_points": grid.times.len(), "detunings": summary });
    report.files.push(csv.finish(command, config, summary)?);
    Ok(())
}
