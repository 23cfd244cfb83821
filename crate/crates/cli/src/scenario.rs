//! Scenario runner: wires a parsed config into the core engines and writes
//! the observables CSV, the run manifest, and optional SVG overlays.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Basis, Mode, ModelKind, OutputFormat, ScenarioConfig};
use crate::csvio::Table;
use crate::error::CliError;
use crate::svg;
use qme_core::analytic;
use qme_core::bases::{self, BasisTransform, Direction};
use qme_core::master;
use qme_core::models::Model;
use qme_core::trajectories::{self, ensemble_average, sample_trajectory};

/// What a run produced, for reporting and tests.
#[derive(Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    generator: &'static str,
    version: &'static str,
    preset: Option<&'a str>,
    config: &'a ScenarioConfig,
    derived: Derived,
    rng: RngInfo,
    files: &'a [String],
}

#[derive(Serialize)]
struct Derived {
    gamma: f64,
    tau1: Option<f64>,
    tau2: Option<f64>,
    basis_label: String,
}

#[derive(Serialize)]
struct RngInfo {
    algorithm: &'static str,
    base_seed: u64,
    streams: usize,
}

/// Analytic timescales for the configured model, when the closed forms apply.
fn model_timescales(model: &Model) -> (Option<f64>, Option<f64>) {
    let p = &model.params;
    match p.nu {
        None => (
            Some(analytic::two_level_tau1(p.delta, p.gamma)),
            Some(analytic::two_level_tau2(p.gamma)),
        ),
        Some(nu) => (
            Some(analytic::v_model_tau1(p.delta, p.gamma, p.beta * nu)),
            Some(analytic::v_model_tau2(p.gamma, p.beta * nu)),
        ),
    }
}

fn build_basis(config: &ScenarioConfig, model: &Model) -> Result<Option<BasisTransform>, CliError> {
    match config.basis {
        Basis::Eigen => Ok(None),
        Basis::Decoherence => {
            let (transform, _) = bases::decoherence_basis(model)
                .map_err(|e| CliError::Config(format!("basis: {e}")))?;
            Ok(Some(transform))
        }
        Basis::Pm => Ok(Some(bases::v_model_pm_basis())),
    }
}

/// Run a scenario, writing outputs under `out_dir` (created if needed).
/// Nothing is written until the configuration has fully validated and the
/// model has been built.
pub fn run_scenario(
    config: &ScenarioConfig,
    out_dir: &Path,
    preset: Option<&str>,
) -> Result<RunSummary, CliError> {
    config.validate()?;
    let model = config.build_model()?;
    let basis = build_basis(config, &model)?;
    let rho0 = config.build_initial_state(&model)?;
    let grid = config.build_grid();

    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;

    let mut files: Vec<String> = Vec::new();
    let want = |f: OutputFormat| config.output.formats.contains(&f);

    match config.mode {
        Mode::Master => {
            let liou = master::assemble(&model, basis.as_ref()).map_err(numerical)?;
            let rho0_run = transform_initial(&rho0, basis.as_ref())?;
            let states = master::evolve(&liou, &rho0_run, &grid).map_err(numerical)?;
            let table = observables_table(&grid, states.iter().map(trajectories::observables_of));
            if want(OutputFormat::Csv) {
                table.write(&out_dir.join("observables.csv"))?;
                files.push("observables.csv".into());
                if let Some(analytic_table) = analytic_overlay(config, &model, &grid) {
                    analytic_table.write(&out_dir.join("analytic.csv"))?;
                    files.push("analytic.csv".into());
                }
            }
            if want(OutputFormat::Svg) {
                let overlay = analytic_overlay(config, &model, &grid);
                let (tau1, tau2) = model_timescales(&model);
                let doc = svg::line_plot(&table, overlay.as_ref(), tau1, tau2, log_x(config));
                std::fs::write(out_dir.join("plot.svg"), doc)
                    .map_err(|e| CliError::Io(e.to_string()))?;
                files.push("plot.svg".into());
            }
        }
        Mode::Ensemble => {
            let summary = ensemble_average(
                &model,
                basis.as_ref(),
                &rho0,
                &grid,
                config.ensemble.count,
                config.ensemble.base_seed,
                config.ensemble.workers,
            )
            .map_err(numerical)?;
            let names = summary.observable_names.clone();
            let mut columns = vec!["t".to_string()];
            columns.extend(names.iter().cloned());
            columns.extend(names.iter().map(|n| format!("{n}_se")));
            let mut table = Table::new(columns);
            for (g, &t) in grid.iter().enumerate() {
                let mut row = vec![t];
                row.extend(trajectories::observables_of(&summary.mean_states[g]));
                row.extend(summary.std_error[g].iter().copied());
                table.push_row(row);
            }
            // master reference for dashed-vs-solid comparison
            let liou = master::assemble(&model, basis.as_ref()).map_err(numerical)?;
            let rho0_run = transform_initial(&rho0, basis.as_ref())?;
            let states = master::evolve(&liou, &rho0_run, &grid).map_err(numerical)?;
            let reference =
                observables_table(&grid, states.iter().map(trajectories::observables_of));
            if want(OutputFormat::Csv) {
                table.write(&out_dir.join("observables.csv"))?;
                files.push("observables.csv".into());
                reference.write(&out_dir.join("master.csv"))?;
                files.push("master.csv".into());
            }
            if want(OutputFormat::Svg) {
                let (tau1, tau2) = model_timescales(&model);
                let doc = svg::line_plot(&table, Some(&reference), tau1, tau2, log_x(config));
                std::fs::write(out_dir.join("plot.svg"), doc)
                    .map_err(|e| CliError::Io(e.to_string()))?;
                files.push("plot.svg".into());
            }
        }
        Mode::Trajectory => {
            let record = sample_trajectory(
                &model,
                basis.as_ref(),
                &rho0,
                &grid,
                config.ensemble.base_seed,
                0,
            )
            .map_err(numerical)?;
            let mut table = jump_flag_table(&model, &grid, &record);
            if want(OutputFormat::Csv) {
                table.write(&out_dir.join("observables.csv"))?;
                files.push("observables.csv".into());
            }
            write_jump_log(out_dir, &record, &mut files, want(OutputFormat::Json))?;
            if want(OutputFormat::Svg) {
                let (tau1, tau2) = model_timescales(&model);
                table.rows.iter_mut().for_each(|r| {
                    r.truncate(r.len() - 1); // drop jump_flag from the plot
                });
                table.columns.truncate(table.columns.len() - 1);
                let doc = svg::line_plot(&table, None, tau1, tau2, log_x(config));
                std::fs::write(out_dir.join("plot.svg"), doc)
                    .map_err(|e| CliError::Io(e.to_string()))?;
                files.push("plot.svg".into());
            }
        }
        Mode::Bloch => {
            let record = sample_trajectory(
                &model,
                basis.as_ref(),
                &rho0,
                &grid,
                config.ensemble.base_seed,
                0,
            )
            .map_err(numerical)?;
            let mut table = Table::new(
                ["t", "sx", "sy", "sz", "jump_flag"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            );
            let mut jump_iter = record.jumps.iter().peekable();
            let mut prev_t = -f64::INFINITY;
            for (g, &t) in grid.iter().enumerate() {
                let s = bases::bloch_map(&record.states[g]);
                let mut flag = 0.0;
                while let Some(&&(jt, _)) = jump_iter.peek() {
                    if jt <= t {
                        if jt > prev_t {
                            flag = 1.0;
                        }
                        jump_iter.next();
                    } else {
                        break;
                    }
                }
                table.push_row(vec![t, s.sx, s.sy, s.sz, flag]);
                prev_t = t;
            }
            if want(OutputFormat::Csv) {
                table.write(&out_dir.join("bloch.csv"))?;
                files.push("bloch.csv".into());
            }
            write_jump_log(out_dir, &record, &mut files, want(OutputFormat::Json))?;
            if want(OutputFormat::Svg) {
                let (tau1, tau2) = model_timescales(&model);
                let mut plot_table = Table::new(
                    ["t", "sx", "sy", "sz"]
                        .iter()
                        .map(|s| s.to_string())
                        .collect(),
                );
                for row in &table.rows {
                    plot_table.push_row(row[..4].to_vec());
                }
                let doc = svg::line_plot(&plot_table, None, tau1, tau2, log_x(config));
                std::fs::write(out_dir.join("plot.svg"), doc)
                    .map_err(|e| CliError::Io(e.to_string()))?;
                files.push("plot.svg".into());
            }
        }
        Mode::Timescales => {
            let liou = master::assemble(&model, basis.as_ref()).map_err(numerical)?;
            let report = master::timescales(&liou).map_err(numerical)?;
            let json =
                serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
            std::fs::write(out_dir.join("timescales.json"), json)
                .map_err(|e| CliError::Io(e.to_string()))?;
            files.push("timescales.json".into());
        }
    }

    // manifest always: it is what makes the run reproducible
    let (tau1, tau2) = model_timescales(&model);
    let manifest_json = {
        let manifest = Manifest {
            generator: "qme",
            version: env!("CARGO_PKG_VERSION"),
            preset,
            config,
            derived: Derived {
                gamma: model.params.gamma,
                tau1,
                tau2,
                basis_label: basis
                    .as_ref()
                    .map(|b| b.to_label.clone())
                    .unwrap_or_else(|| "energy".into()),
            },
            rng: RngInfo {
                algorithm: trajectories::RNG_NAME,
                base_seed: config.ensemble.base_seed,
                streams: match config.mode {
                    Mode::Ensemble => config.ensemble.count,
                    Mode::Trajectory | Mode::Bloch => 1,
                    _ => 0,
                },
            },
            files: &files,
        };
        serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?
    };
    std::fs::write(out_dir.join("manifest.json"), manifest_json)
        .map_err(|e| CliError::Io(e.to_string()))?;
    files.push("manifest.json".into());

    Ok(RunSummary {
        out_dir: out_dir.to_path_buf(),
        files,
        warnings: model.warnings.clone(),
    })
}

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

fn log_x(config: &ScenarioConfig) -> bool {
    matches!(config.time_grid.spacing, crate::config::Spacing::Log)
}

fn transform_initial(
    rho0: &qme_core::ComplexMatrix,
    basis: Option<&BasisTransform>,
) -> Result<qme_core::ComplexMatrix, CliError> {
    match basis {
        None => Ok(rho0.clone()),
        Some(b) => bases::transform_state(rho0, b, Direction::Forward)
            .map_err(|e| CliError::Config(format!("initialState: {e}"))),
    }
}

fn observables_table(grid: &[f64], observables: impl Iterator<Item = Vec<f64>>) -> Table {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(grid.len());
    let mut width = 0;
    for (t, obs) in grid.iter().zip(observables) {
        width = obs.len();
        let mut row = vec![*t];
        row.extend(obs);
        rows.push(row);
    }
    let dim = match width {
        4 => 2,
        9 => 3,
        _ => unreachable!("observable layout"),
    };
    let mut columns = vec!["t".to_string()];
    columns.extend(trajectories::observable_names(dim));
    let mut table = Table::new(columns);
    for row in rows {
        table.push_row(row);
    }
    table
}

fn jump_flag_table(model: &Model, grid: &[f64], record: &trajectories::TrajectoryRecord) -> Table {
    let mut columns = vec!["t".to_string()];
    columns.extend(trajectories::observable_names(model.dimension));
    columns.push("jump_flag".into());
    let mut table = Table::new(columns);
    let mut jump_idx = 0usize;
    let mut prev_t = -f64::INFINITY;
    for (g, &t) in grid.iter().enumerate() {
        let mut flag = 0.0;
        while jump_idx < record.jumps.len() && record.jumps[jump_idx].0 <= t {
            if record.jumps[jump_idx].0 > prev_t {
                flag = 1.0;
            }
            jump_idx += 1;
        }
        let mut row = vec![t];
        row.extend(trajectories::observables_of(&record.states[g]));
        row.push(flag);
        table.push_row(row);
        prev_t = t;
    }
    table
}

#[derive(Serialize)]
struct JumpLog<'a> {
    rng: &'static str,
    base_seed: u64,
    stream: u64,
    jumps: &'a [(f64, usize)],
}

fn write_jump_log(
    out_dir: &Path,
    record: &trajectories::TrajectoryRecord,
    files: &mut Vec<String>,
    enabled: bool,
) -> Result<(), CliError> {
    if !enabled {
        return Ok(());
    }
    let log = JumpLog {
        rng: record.rng_name,
        base_seed: record.base_seed,
        stream: record.stream,
        jumps: &record.jumps,
    };
    let json = serde_json::to_string_pretty(&log).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(out_dir.join("trajectory.json"), json)
        .map_err(|e| CliError::Io(e.to_string()))?;
    files.push("trajectory.json".into());
    Ok(())
}

/// Closed-form overlay for the scenarios the perturbative solutions cover:
/// ground start in the bases the figures use. Imaginary coherence parts are
/// not in the analytic family and are left out of the overlay.
fn analytic_overlay(config: &ScenarioConfig, model: &Model, grid: &[f64]) -> Option<Table> {
    use crate::config::InitialStateKind;
    if config.initial_state.kind != InitialStateKind::Ground {
        return None;
    }
    let p = &model.params;
    match (config.model.kind, config.basis) {
        (ModelKind::TwoLevel, Basis::Eigen) => {
            let mut table = Table::new(
                ["t", "rho_00", "rho_11", "re_coh"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            );
            for &t in grid {
                let v = analytic::two_level_eigenbasis(t, p.delta, p.gamma);
                table.push_row(vec![t, 1.0 - v.rho11, v.rho11, v.re_coh]);
            }
            Some(table)
        }
        (ModelKind::TwoLevel, Basis::Decoherence) => {
            let mut table = Table::new(
                ["t", "rho_00", "rho_11", "re_coh"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            );
            for &t in grid {
                let v = analytic::two_level_alternate(t, p.delta, p.gamma);
                table.push_row(vec![t, v.rho_mm, 1.0 - v.rho_mm, v.re_coh_pm]);
            }
            Some(table)
        }
        (ModelKind::VModel, Basis::Eigen) => {
            let nu = p.nu.expect("v_model");
            let mut table = Table::new(
                ["t", "rho_00", "rho_11", "rho_22", "re_coh_12"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            );
            for &t in grid {
                let v = analytic::v_model_eigenbasis(t, nu, p.delta, p.gamma, p.beta);
                let excited = (1.0 - v.rho11) / 2.0;
                table.push_row(vec![t, v.rho11, excited, excited, v.re_coh32]);
            }
            Some(table)
        }
        (ModelKind::VModel, Basis::Pm) => {
            let nu = p.nu.expect("v_model");
            let mut table = Table::new(
                ["t", "rho_00", "rho_11", "rho_22", "re_coh_12"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            );
            for &t in grid {
                let v = analytic::v_model_pm(t, nu, p.delta, p.gamma, p.beta);
                // ρ+−ᴿ decouples and stays zero from the ground start
                table.push_row(vec![t, 1.0 - v.rho_pp - v.rho_mm, v.rho_pp, v.rho_mm, 0.0]);
            }
            Some(table)
        }
        _ => None,
    }
}
