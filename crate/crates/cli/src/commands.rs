//! The four table-producing workflows.

use std::path::PathBuf;

use dsb_core::coefficients::CoefficientCache;
use dsb_core::evolve::{evolve_with_table, uniform_steps};
use dsb_core::{BathParams, DensityMatrix, DsbError, EvolveConfig, KernelTable, PurityMode};
use rayon::prelude::*;

use crate::config::{ScenarioConfig, SweepParameter};
use crate::error::CliError;
use crate::output::write_csv;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Kernels,
    Coefficients,
    SweepD,
    Purity,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Kernels => "kernels",
            Command::Coefficients => "coefficients",
            Command::SweepD => "sweep-d",
            Command::Purity => "purity",
        }
    }

    pub fn header(self) -> &'static [&'static str] {
        match self {
            Command::Kernels => &["t", "nu", "eta"],
            Command::Coefficients => &["t", "D", "f", "G", "omega_shift", "r1", "r2"],
            Command::SweepD => &["param_value", "t", "D"],
            Command::Purity => &["param_value", "t", "purity_exact", "purity_simplified"],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<f64>>,
}

fn computation(e: DsbError) -> CliError {
    match e {
        DsbError::InvalidParameter { field, reason } => CliError::new(field, reason),
        DsbError::HorizonExceeded { .. } => CliError::new("evolve.t_max", e.to_string()),
        DsbError::StepUnderflow { .. } => CliError::new("evolve.step_control", e.to_string()),
        DsbError::Convergence { .. } => CliError::new("evolve.tol", e.to_string()),
    }
}

/// Output instants in units of 1/Δ: every `record_every`-th point of the
/// uniform `dt` grid plus the horizon itself.
pub fn sample_times(ev: &EvolveConfig) -> Vec<f64> {
    let (n, h) = uniform_steps(ev.t_max, ev.dt);
    (0..=n)
        .filter(|k| k.is_multiple_of(ev.record_every) || *k == n)
        .map(|k| if k == n { ev.t_max } else { k as f64 * h })
        .collect()
}

fn build_table(b: &BathParams, ev: &EvolveConfig) -> Result<KernelTable, CliError> {
    KernelTable::build(b, ev.t_max, ev.tol).map_err(computation)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::new("workers", e.to_string()))
}

/// Computes the table for `cmd`. Sweep points run on up to `workers` threads
/// and are concatenated in sweep order.
pub fn run(cmd: Command, cfg: &ScenarioConfig, workers: usize) -> Result<Table, CliError> {
    cfg.validate()?;
    let ev = cfg.evolve_internal();
    let times = sample_times(&ev);
    let coeff_tol = 0.1 * ev.tol;
    let rows = match cmd {
        Command::Kernels => {
            let table = build_table(&cfg.bath, &ev)?;
            times
                .iter()
                .map(|&t| Ok(vec![cfg.time_out(t), table.nu(t)?, table.eta(t)?]))
                .collect::<Result<Vec<_>, DsbError>>()
                .map_err(computation)?
        }
        Command::Coefficients => {
            let table = build_table(&cfg.bath, &ev)?;
            let mut cache = CoefficientCache::new(cfg.qubit, &table, coeff_tol);
            let mut rows = Vec::with_capacity(times.len());
            for &t in &times {
                let c = cache.get(t).map_err(computation)?;
                rows.push(vec![cfg.time_out(t), c.d, c.f, c.g, c.omega_shift, c.r1, c.r2]);
            }
            rows
        }
        Command::SweepD => {
            let sweep = cfg
                .sweep
                .as_ref()
                .ok_or_else(|| CliError::new("sweep", "required by sweep-d"))?;
            let shared = match sweep.parameter {
                SweepParameter::Beta => None,
                _ => Some(build_table(&cfg.bath, &ev)?),
            };
            let curves = pool(workers)?.install(|| {
                sweep
                    .values
                    .par_iter()
                    .map(|&v| {
                        let (q, b) = cfg.with_parameter(sweep.parameter, v)?;
                        let own;
                        let table = match &shared {
                            Some(t) => t,
                            None => {
                                own = build_table(&b, &ev)?;
                                &own
                            }
                        };
                        let mut cache = CoefficientCache::new(q, table, coeff_tol);
                        times
                            .iter()
                            .map(|&t| Ok(vec![v, cfg.time_out(t), cache.get(t).map_err(computation)?.d]))
                            .collect::<Result<Vec<_>, CliError>>()
                    })
                    .collect::<Result<Vec<_>, CliError>>()
            })?;
            curves.concat()
        }
        Command::Purity => {
            let sweep = cfg
                .sweep
                .as_ref()
                .ok_or_else(|| CliError::new("sweep", "required by purity"))?;
            if sweep.parameter == SweepParameter::Beta {
                return Err(CliError::new(
                    "sweep.parameter",
                    "purity sweeps accept s or omega_drive",
                ));
            }
            let rho0 = cfg
                .initial_bloch
                .map(|v| v.to_density_matrix())
                .unwrap_or_else(DensityMatrix::plus_x);
            let ev = EvolveConfig {
                purity_mode: match ev.purity_mode {
                    PurityMode::Exact => PurityMode::Both,
                    m => m,
                },
                ..ev
            };
            let table = build_table(&cfg.bath, &ev)?;
            let curves = pool(workers)?.install(|| {
                sweep
                    .values
                    .par_iter()
                    .map(|&v| {
                        let (q, _) = cfg.with_parameter(sweep.parameter, v)?;
                        let traj = evolve_with_table(&rho0, &q, &table, &ev).map_err(computation)?;
                        Ok(traj
                            .samples
                            .iter()
                            .map(|s| {
                                let simplified = s.purity_simplified.expect("simplified purity is always tracked here");
                                vec![v, cfg.time_out(s.t), s.purity, simplified]
                            })
                            .collect::<Vec<_>>())
                    })
                    .collect::<Result<Vec<_>, CliError>>()
            })?;
            curves.concat()
        }
    };
    Ok(Table {
        header: cmd.header(),
        rows,
    })
}

/// Runs `cmd` and writes its CSV to the configured output path.
pub fn execute(cmd: Command, cfg: &ScenarioConfig, workers: usize) -> Result<PathBuf, CliError> {
    let table = run(cmd, cfg, workers)?;
    write_csv(&cfg.output_path, table.header, &table.rows)?;
    Ok(cfg.output_path.clone())
}
