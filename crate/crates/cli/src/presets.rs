//! Built-in scenarios for the three figure workflows. All share
//! ε₀ = s = Ω = Δ = 1, Λ = 36Δ, α = 0.01 and β = 8/Δ.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::ValueEnum;
use dsb_core::{BathParams, EvolveConfig, QubitParams, TimeUnit};

use crate::config::{ScenarioConfig, Sweep, SweepParameter};

pub const ALPHA: f64 = 0.01;
pub const CUTOFF: f64 = 36.0;
/// Δ/h = 5 GHz at T = 30 mK gives k_B T ≈ Δ/8.
pub const BETA: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Coefficients over one drive period.
    Fig1,
    /// D(t) for s ∈ {0.5, 1, 2} over one drive period.
    Fig2,
    /// Purity for s ∈ {0.5, 1, 2} up to t = π/Δ.
    Fig3,
}

fn scenario(t_max: f64, steps: usize, record_every: usize, sweep: Option<Sweep>, output: &str) -> ScenarioConfig {
    let qubit = QubitParams::new(1.0, 1.0, 1.0, 1.0).expect("preset qubit is valid");
    let unit = TimeUnit::default();
    let t_io = unit.from_internal(t_max, qubit.delta);
    ScenarioConfig {
        qubit,
        bath: BathParams::new(ALPHA, CUTOFF, BETA).expect("preset bath is valid"),
        evolve: EvolveConfig {
            record_every,
            ..EvolveConfig::fixed(t_io, t_io / steps as f64)
        },
        sweep,
        output_path: PathBuf::from(output),
        time_unit: unit,
        initial_bloch: None,
    }
}

impl Preset {
    pub fn config(self) -> ScenarioConfig {
        let amplitudes = Some(Sweep {
            parameter: SweepParameter::S,
            values: vec![0.5, 1.0, 2.0],
        });
        match self {
            Preset::Fig1 => scenario(2.0 * PI, 1000, 1, None, "fig1_coefficients.csv"),
            Preset::Fig2 => scenario(2.0 * PI, 1000, 1, amplitudes, "fig2_sweep_d.csv"),
            Preset::Fig3 => scenario(PI, 4000, 10, amplitudes, "fig3_purity.csv"),
        }
    }
}
