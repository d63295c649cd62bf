//! Time evolution of the reduced density matrix under
//!
//! ```text
//! ρ̇ = −i[H_eff + Ω̃σ_z, ρ] − D[σ_z,[σ_z,ρ]] − G[σ_z,[σ_x,ρ]] − f[σ_z,[σ_y,ρ]]
//!      + i r₁[σ_z,{σ_x,ρ}] + i r₂[σ_z,{σ_y,ρ}]
//! ```
//!
//! integrated with the classical fourth-order Runge–Kutta scheme, optionally
//! with step-doubling error control. The generator is not of Lindblad form,
//! so positivity is monitored through [`DensityMatrix::min_eigenvalue`]
//! rather than enforced.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientCache, CoefficientSet, HeffCoeffs};
use crate::error::{DsbError, Result};
use crate::kernels::{KernelTable, DEFAULT_TOL};
use crate::model::{BathParams, DensityMatrix, Mat2, QubitParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StepControl {
    Fixed,
    Adaptive { rtol: f64 },
}

/// Which purity-rate laws are evaluated along a trajectory. `tr ρ²` of the
/// evolved state is always recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PurityMode {
    /// The trace formula built from D, G, f and r₁ (see [`purity_rate_exact`]).
    Exact,
    /// ξ̇ = −(4/3)D, integrated alongside the state.
    Simplified,
    Both,
}

impl PurityMode {
    fn exact(self) -> bool {
        matches!(self, PurityMode::Exact | PurityMode::Both)
    }

    fn simplified(self) -> bool {
        matches!(self, PurityMode::Simplified | PurityMode::Both)
    }
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn is_default_tol(v: &f64) -> bool {
    *v == DEFAULT_TOL
}

fn is_false(v: &bool) -> bool {
    !*v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub t_max: f64,
    /// Step size (fixed mode) or initial step (adaptive mode).
    pub dt: f64,
    pub step_control: StepControl,
    /// Record every n-th accepted step; the final instant is always recorded.
    pub record_every: usize,
    pub purity_mode: PurityMode,
    /// Use r₂ instead of r₁ in the tr(ρ²σ_x) term of the exact purity rate.
    #[serde(default, skip_serializing_if = "is_false")]
    pub r2_in_last_term: bool,
    /// Instant after which samples are flagged as outside the short-time
    /// regime; defaults to one bare Rabi period 2π/Δ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validity_horizon: Option<f64>,
    /// Absolute accuracy of the tabulated kernels.
    #[serde(default = "default_tol", skip_serializing_if = "is_default_tol")]
    pub tol: f64,
}

impl EvolveConfig {
    pub fn fixed(t_max: f64, dt: f64) -> Self {
        EvolveConfig {
            t_max,
            dt,
            step_control: StepControl::Fixed,
            record_every: 1,
            purity_mode: PurityMode::Both,
            r2_in_last_term: false,
            validity_horizon: None,
            tol: DEFAULT_TOL,
        }
    }

    pub fn adaptive(t_max: f64, dt: f64, rtol: f64) -> Self {
        EvolveConfig {
            step_control: StepControl::Adaptive { rtol },
            ..Self::fixed(t_max, dt)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(DsbError::invalid("t_max", "must be finite and > 0"));
        }
        if !(self.dt > 0.0) || self.dt > self.t_max {
            return Err(DsbError::invalid("dt", "must satisfy 0 < dt <= t_max"));
        }
        if let StepControl::Adaptive { rtol } = self.step_control {
            if !(rtol > 0.0) {
                return Err(DsbError::invalid("rtol", "must be > 0"));
            }
        }
        if self.record_every == 0 {
            return Err(DsbError::invalid("record_every", "must be >= 1"));
        }
        if let Some(h) = self.validity_horizon {
            if !(h > 0.0) {
                return Err(DsbError::invalid("validity_horizon", "must be > 0"));
            }
        }
        if !(self.tol > 0.0) {
            return Err(DsbError::invalid("tol", "must be > 0"));
        }
        Ok(())
    }
}

/// The drift and dissipative terms of the generator at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeneratorTerms {
    pub heff: HeffCoeffs,
    pub coeffs: CoefficientSet,
}

/// Supplies generator terms to the integrator. Implemented by
/// [`PhysicalDrive`] and by any `FnMut(f64) -> Result<GeneratorTerms>`, which
/// lets callers substitute synthetic coefficients.
pub trait Drive {
    fn terms(&mut self, t: f64) -> Result<GeneratorTerms>;
}

impl<F> Drive for F
where
    F: FnMut(f64) -> Result<GeneratorTerms>,
{
    fn terms(&mut self, t: f64) -> Result<GeneratorTerms> {
        self(t)
    }
}

/// Generator terms of the driven qubit coupled to a tabulated bath.
pub struct PhysicalDrive<'a> {
    cache: CoefficientCache<'a>,
}

impl<'a> PhysicalDrive<'a> {
    pub fn new(qubit: QubitParams, table: &'a KernelTable, tol: f64) -> Self {
        PhysicalDrive {
            cache: CoefficientCache::new(qubit, table, tol),
        }
    }

    pub fn coefficients(&mut self, t: f64) -> Result<CoefficientSet> {
        self.cache.get(t)
    }
}

impl Drive for PhysicalDrive<'_> {
    fn terms(&mut self, t: f64) -> Result<GeneratorTerms> {
        Ok(GeneratorTerms {
            heff: HeffCoeffs::at(self.cache.qubit(), t),
            coeffs: self.cache.get(t)?,
        })
    }
}

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Right-hand side of the master equation for the matrix `rho`.
pub fn master_rhs(rho: &Mat2, h: &HeffCoeffs, c: &CoefficientSet) -> Mat2 {
    let (sx, sy, sz) = (Mat2::SIGMA_X, Mat2::SIGMA_Y, Mat2::SIGMA_Z);
    let hamiltonian = Mat2::pauli_combination(h.a1, h.b1, h.c1 + c.omega_shift);
    let mut out = hamiltonian.commutator(rho).scale(-I);
    if c.d != 0.0 {
        out += sz.commutator(&sz.commutator(rho)) * (-c.d);
    }
    if c.g != 0.0 {
        out += sz.commutator(&sx.commutator(rho)) * (-c.g);
    }
    if c.f != 0.0 {
        out += sz.commutator(&sy.commutator(rho)) * (-c.f);
    }
    if c.r1 != 0.0 {
        out += sz.commutator(&sx.anticommutator(rho)).scale(I * c.r1);
    }
    if c.r2 != 0.0 {
        out += sz.commutator(&sy.anticommutator(rho)).scale(I * c.r2);
    }
    out
}

fn tr(m: Mat2) -> f64 {
    m.trace().re
}

/// Purity rate as the trace formula
///
/// ```text
/// ξ̇ = −4D tr(ρ²σ_z² − ρσ_zρσ_z) − 4G tr(ρσ_xρσ_z) − f tr(ρσ_yρσ_z)
///     − 4r₁ tr(ρ²σ_y) + 4r₁ tr(ρ²σ_x)
/// ```
///
/// taken term by term as published. `r2_in_last_term` replaces the final r₁
/// by r₂.
pub fn purity_rate_exact(rho: &DensityMatrix, c: &CoefficientSet, r2_in_last_term: bool) -> f64 {
    let r = *rho.matrix();
    let (sx, sy, sz) = (Mat2::SIGMA_X, Mat2::SIGMA_Y, Mat2::SIGMA_Z);
    let r2 = r * r;
    let last = if r2_in_last_term { c.r2 } else { c.r1 };
    -4.0 * c.d * tr(r2 * sz * sz - r * sz * r * sz)
        - 4.0 * c.g * tr(r * sx * r * sz)
        - c.f * tr(r * sy * r * sz)
        - 4.0 * c.r1 * tr(r2 * sy)
        + 4.0 * last * tr(r2 * sx)
}

/// ξ̇ = −(4/3)·D.
pub fn purity_rate_simplified(c: &CoefficientSet) -> f64 {
    -4.0 / 3.0 * c.d
}

/// d tr(ρ²)/dt = 2 tr(ρ ρ̇) implied by [`master_rhs`].
pub fn purity_rate_generator(rho: &DensityMatrix, h: &HeffCoeffs, c: &CoefficientSet) -> f64 {
    2.0 * tr(*rho.matrix() * master_rhs(rho.matrix(), h, c))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub rho: DensityMatrix,
    /// tr(ρ²) of the evolved state.
    pub purity: f64,
    /// 1 − (4/3)∫D, started from the initial purity.
    pub purity_simplified: Option<f64>,
    pub purity_rate_exact: Option<f64>,
    pub coeffs: CoefficientSet,
    pub beyond_horizon: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories hold the initial sample")
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Evolves `rho0` under the driven qubit coupled to the bath `b`.
pub fn evolve(rho0: &DensityMatrix, q: &QubitParams, b: &BathParams, cfg: &EvolveConfig) -> Result<Trajectory> {
    cfg.validate()?;
    q.validate()?;
    let table = KernelTable::build(b, cfg.t_max, cfg.tol)?;
    evolve_with_table(rho0, q, &table, cfg)
}

/// As [`evolve`], reusing a kernel table that covers `cfg.t_max`.
pub fn evolve_with_table(
    rho0: &DensityMatrix,
    q: &QubitParams,
    table: &KernelTable,
    cfg: &EvolveConfig,
) -> Result<Trajectory> {
    let mut drive = PhysicalDrive::new(*q, table, 0.1 * cfg.tol);
    let horizon = cfg.validity_horizon.unwrap_or_else(|| q.short_time_horizon());
    evolve_with(rho0, &mut drive, cfg, horizon)
}

/// Uniform step that lands exactly on `t_max` and is no larger than `dt`.
pub fn uniform_steps(t_max: f64, dt: f64) -> (usize, f64) {
    let n = ((t_max / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (n, t_max / n as f64)
}

#[derive(Clone, Copy)]
struct State {
    rho: Mat2,
    simplified: f64,
}

impl State {
    fn axpy(&self, h: f64, k: &State) -> State {
        State {
            rho: self.rho + k.rho * h,
            simplified: self.simplified + h * k.simplified,
        }
    }

    fn max_diff(&self, o: &State) -> f64 {
        self.rho
            .max_abs_diff(&o.rho)
            .max((self.simplified - o.simplified).abs())
    }
}

struct Stepper<'d, D: Drive> {
    drive: &'d mut D,
}

impl<D: Drive> Stepper<'_, D> {
    fn derivative(&mut self, t: f64, y: &State) -> Result<State> {
        let g = self.drive.terms(t)?;
        Ok(State {
            rho: master_rhs(&y.rho, &g.heff, &g.coeffs),
            simplified: purity_rate_simplified(&g.coeffs),
        })
    }

    /// One step from `t` to `t_end`; stage times never pass `t_end`.
    fn rk4(&mut self, t: f64, t_end: f64, y: &State) -> Result<State> {
        let h = t_end - t;
        let mid = t + 0.5 * h;
        let k1 = self.derivative(t, y)?;
        let k2 = self.derivative(mid, &y.axpy(0.5 * h, &k1))?;
        let k3 = self.derivative(mid, &y.axpy(0.5 * h, &k2))?;
        let k4 = self.derivative(t_end, &y.axpy(h, &k3))?;
        Ok(State {
            rho: y.rho + (k1.rho + k2.rho * 2.0 + k3.rho * 2.0 + k4.rho) * (h / 6.0),
            simplified: y.simplified
                + h / 6.0 * (k1.simplified + 2.0 * k2.simplified + 2.0 * k3.simplified + k4.simplified),
        })
    }
}

/// Integrates the master equation with generator terms supplied by `drive`.
/// Samples past `validity_horizon` are flagged.
pub fn evolve_with<D: Drive>(
    rho0: &DensityMatrix,
    drive: &mut D,
    cfg: &EvolveConfig,
    validity_horizon: f64,
) -> Result<Trajectory> {
    cfg.validate()?;
    let mode = cfg.purity_mode;
    let mut stepper = Stepper { drive };
    let record = |stepper: &mut Stepper<'_, D>, t: f64, y: &State| -> Result<Sample> {
        let coeffs = stepper.drive.terms(t)?.coeffs;
        let rho = DensityMatrix::from_evolved(y.rho);
        Ok(Sample {
            t,
            rho,
            purity: rho.purity(),
            purity_simplified: mode.simplified().then_some(y.simplified),
            purity_rate_exact: mode
                .exact()
                .then(|| purity_rate_exact(&rho, &coeffs, cfg.r2_in_last_term)),
            coeffs,
            beyond_horizon: t > validity_horizon,
        })
    };

    let mut y = State {
        rho: *rho0.matrix(),
        simplified: rho0.purity(),
    };
    let mut samples = vec![record(&mut stepper, 0.0, &y)?];

    match cfg.step_control {
        StepControl::Fixed => {
            let (n, h) = uniform_steps(cfg.t_max, cfg.dt);
            for k in 0..n {
                let t = k as f64 * h;
                let t_next = if k + 1 == n { cfg.t_max } else { (k + 1) as f64 * h };
                y = stepper.rk4(t, t_next, &y)?;
                if (k + 1).is_multiple_of(cfg.record_every) || k + 1 == n {
                    samples.push(record(&mut stepper, t_next, &y)?);
                }
            }
        }
        StepControl::Adaptive { rtol } => {
            let mut t = 0.0;
            let mut h = cfg.dt;
            let mut accepted = 0usize;
            while t < cfg.t_max {
                let last = t + h >= cfg.t_max;
                let t_end = if last { cfg.t_max } else { t + h };
                let step = t_end - t;
                if step < 1e-14 * t.max(1.0) {
                    return Err(DsbError::StepUnderflow { last_good_t: t, step });
                }
                let t_mid = t + 0.5 * step;
                let full = stepper.rk4(t, t_end, &y)?;
                let half = stepper.rk4(t, t_mid, &y)?;
                let fine = stepper.rk4(t_mid, t_end, &half)?;
                let err = fine.max_diff(&full) / 15.0;
                let factor = if err == 0.0 {
                    4.0
                } else {
                    (0.9 * (rtol / err).powf(0.2)).clamp(0.2, 4.0)
                };
                if err <= rtol {
                    t = t_end;
                    y = fine;
                    accepted += 1;
                    if accepted.is_multiple_of(cfg.record_every) || last {
                        samples.push(record(&mut stepper, t, &y)?);
                    }
                }
                h = step * factor;
            }
        }
    }

    Ok(Trajectory { samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BlochVector;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn coeffs(d: f64, f: f64, g: f64, omega_shift: f64, r1: f64, r2: f64) -> CoefficientSet {
        CoefficientSet {
            d,
            f,
            g,
            omega_shift,
            r1,
            r2,
        }
    }

    #[test]
    fn unitary_limit_of_rhs() {
        let h = HeffCoeffs {
            a1: 0.5,
            b1: 0.0,
            c1: 0.0,
        };
        let rho = DensityMatrix::pure_z_up();
        let out = master_rhs(rho.matrix(), &h, &CoefficientSet::ZERO);
        // −i(1/2)[σ_x, diag(1,0)] = −(i/2)·[[0,−1],[1,0]]
        let expected = Mat2::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.5),
            Complex64::new(0.0, -0.5),
            Complex64::new(0.0, 0.0),
        );
        assert!(out.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn pure_dephasing_rhs() {
        let rho = BlochVector::new(0.3, -0.2, 0.4).to_density_matrix();
        let d = 0.7;
        let out = master_rhs(
            rho.matrix(),
            &HeffCoeffs::default(),
            &coeffs(d, 0.0, 0.0, 0.0, 0.0, 0.0),
        );
        assert_abs_diff_eq!(out.get(0, 0).norm(), 0.0);
        assert_abs_diff_eq!(out.get(1, 1).norm(), 0.0);
        assert!((out.get(0, 1) + rho.get(0, 1) * (4.0 * d)).norm() < 1e-15);
        assert!((out.get(1, 0) + rho.get(1, 0) * (4.0 * d)).norm() < 1e-15);
    }

    fn any_state() -> impl Strategy<Value = DensityMatrix> {
        (-0.57f64..0.57, -0.57f64..0.57, -0.57f64..0.57)
            .prop_map(|(x, y, z)| BlochVector::new(x, y, z).to_density_matrix())
    }

    fn any_coeffs() -> impl Strategy<Value = (HeffCoeffs, CoefficientSet)> {
        (
            proptest::array::uniform3(-2.0f64..2.0),
            proptest::array::uniform6(-2.0f64..2.0),
        )
            .prop_map(|(h, c)| {
                (
                    HeffCoeffs {
                        a1: h[0],
                        b1: h[1],
                        c1: h[2],
                    },
                    coeffs(c[0], c[1], c[2], c[3], c[4], c[5]),
                )
            })
    }

    proptest! {
        #[test]
        fn rhs_is_traceless_and_hermitian(rho in any_state(), (h, c) in any_coeffs()) {
            let out = master_rhs(rho.matrix(), &h, &c);
            prop_assert!(out.trace().norm() < 1e-14);
            prop_assert!(out.hermiticity_defect() < 1e-14);
        }

        #[test]
        fn literal_and_generator_rates_agree_when_cross_terms_vanish(
            rho in any_state(), (h, c) in any_coeffs()
        ) {
            // with G = f = 0 and r₂ substituted in the final term the trace
            // formula is exactly 2 tr(ρρ̇)
            let c = CoefficientSet { f: 0.0, g: 0.0, ..c };
            let lit = purity_rate_exact(&rho, &c, true);
            let gen = purity_rate_generator(&rho, &h, &c);
            prop_assert!((lit - gen).abs() < 1e-13);
        }
    }

    #[test]
    fn exact_purity_rate_spot_values() {
        let c = coeffs(0.31, -0.07, 0.05, 0.2, 0.11, -0.13);
        assert_abs_diff_eq!(
            purity_rate_exact(&DensityMatrix::pure_z_up(), &c, false),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            purity_rate_exact(&DensityMatrix::plus_x(), &c, false),
            -4.0 * c.d + 4.0 * c.r1,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            purity_rate_exact(&DensityMatrix::plus_x(), &c, true),
            -4.0 * c.d + 4.0 * c.r2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            purity_rate_exact(&DensityMatrix::maximally_mixed(), &c, false),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn simplified_purity_rate() {
        assert_eq!(purity_rate_simplified(&CoefficientSet::ZERO), 0.0);
        assert_abs_diff_eq!(
            purity_rate_simplified(&coeffs(0.3, 0.0, 0.0, 0.0, 0.0, 0.0)),
            -0.4,
            epsilon = 1e-15
        );
        assert!(purity_rate_simplified(&coeffs(1e-3, 5.0, 5.0, 5.0, 5.0, 5.0)) <= 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(EvolveConfig::fixed(1.0, 0.1).validate().is_ok());
        assert!(EvolveConfig::fixed(1.0, 2.0).validate().is_err());
        assert!(EvolveConfig::fixed(0.0, 0.1).validate().is_err());
        assert!(EvolveConfig::adaptive(1.0, 0.1, 0.0).validate().is_err());
        let cfg = EvolveConfig {
            record_every: 0,
            ..EvolveConfig::fixed(1.0, 0.1)
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn uniform_steps_land_on_horizon() {
        assert_eq!(uniform_steps(1.0, 0.1).0, 10);
        assert_eq!(uniform_steps(1.0, 0.3).0, 4);
        let (n, h) = uniform_steps(PI, PI / 1024.0);
        assert_eq!(n, 1024);
        assert_eq!(h, PI / 1024.0);
    }

    #[test]
    fn zero_coupling_keeps_state_pure() {
        let q = QubitParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let b = BathParams::new(0.0, 36.0, 8.0).unwrap();
        let cfg = EvolveConfig::fixed(2.0 * PI, 2.0 * PI / 4000.0);
        let traj = evolve(&DensityMatrix::plus_x(), &q, &b, &cfg).unwrap();
        assert_eq!(traj.len(), 4001);
        for s in &traj.samples {
            assert!((s.purity - 1.0).abs() <= 1e-9);
            assert_eq!(s.coeffs, CoefficientSet::ZERO);
        }
        assert!(!traj.samples[3999].beyond_horizon);
    }

    #[test]
    fn constant_dephasing_matches_closed_form() {
        let d0 = 0.8;
        let mut drive = |_t: f64| {
            Ok(GeneratorTerms {
                heff: HeffCoeffs::default(),
                coeffs: coeffs(d0, 0.0, 0.0, 0.0, 0.0, 0.0),
            })
        };
        let rho0 = DensityMatrix::plus_x();
        let cfg = EvolveConfig::fixed(2.0, 1e-3);
        let traj = evolve_with(&rho0, &mut drive, &cfg, f64::INFINITY).unwrap();
        for s in traj.samples.iter().step_by(100) {
            let expected = 0.5 * (-4.0 * d0 * s.t).exp();
            assert!((s.rho.get(0, 1).norm() / expected - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn trajectory_sampling_and_flags() {
        let q = QubitParams::new(1.0, 1.0, 0.5, 2.0).unwrap();
        let b = BathParams::new(0.01, 4.0, 2.0).unwrap();
        let mut cfg = EvolveConfig::fixed(8.0, 0.01);
        cfg.record_every = 50;
        let traj = evolve(&DensityMatrix::plus_x(), &q, &b, &cfg).unwrap();
        assert_eq!(traj.samples[0].t, 0.0);
        assert_eq!(traj.samples[0].purity, 1.0);
        assert!(traj.times().collect::<Vec<_>>().windows(2).all(|w| w[1] > w[0]));
        assert_eq!(traj.last().t, 8.0);
        assert!(traj.last().beyond_horizon);
        assert!(!traj.samples[1].beyond_horizon);
        for s in &traj.samples {
            assert!((s.rho.trace() - 1.0).norm() <= 1e-10);
            assert!(s.rho.matrix().hermiticity_defect() <= 1e-10);
            assert!(s.purity_simplified.is_some() && s.purity_rate_exact.is_some());
        }
    }

    #[test]
    fn adaptive_matches_fixed() {
        let q = QubitParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let b = BathParams::new(0.02, 6.0, 3.0).unwrap();
        let table = KernelTable::build(&b, 3.0, 1e-10).unwrap();
        let fixed = evolve_with_table(&DensityMatrix::plus_x(), &q, &table, &EvolveConfig::fixed(3.0, 1e-3)).unwrap();
        let adaptive = evolve_with_table(
            &DensityMatrix::plus_x(),
            &q,
            &table,
            &EvolveConfig::adaptive(3.0, 1e-2, 1e-10),
        )
        .unwrap();
        assert_eq!(adaptive.last().t, 3.0);
        assert!(fixed.last().rho.matrix().max_abs_diff(adaptive.last().rho.matrix()) < 1e-8);
    }

    #[test]
    fn step_underflow_is_reported() {
        let mut drive = |t: f64| {
            // blows up as t → 0.5, forcing ever smaller steps
            Ok(GeneratorTerms {
                heff: HeffCoeffs {
                    a1: 1.0 / (0.5 - t).abs(),
                    b1: 0.0,
                    c1: 0.0,
                },
                coeffs: CoefficientSet::ZERO,
            })
        };
        let cfg = EvolveConfig::adaptive(1.0, 0.1, 1e-12);
        match evolve_with(&DensityMatrix::pure_z_up(), &mut drive, &cfg, f64::INFINITY) {
            Err(DsbError::StepUnderflow { last_good_t, .. }) => assert!(last_good_t < 0.5 && last_good_t > 0.4),
            other => panic!("expected underflow, got {other:?}"),
        }
    }

    #[test]
    fn z_eigenstate_is_immune_to_dephasing() {
        let q = QubitParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let b = BathParams::new(0.01, 36.0, 8.0).unwrap();
        let table = KernelTable::build(&b, 2.0 * PI, 1e-8).unwrap();
        let mut physical = PhysicalDrive::new(q, &table, 1e-9);
        let mut drive = |t: f64| {
            let c = physical.coefficients(t)?;
            Ok(GeneratorTerms {
                heff: HeffCoeffs::default(),
                coeffs: CoefficientSet {
                    d: c.d,
                    ..CoefficientSet::ZERO
                },
            })
        };
        let cfg = EvolveConfig::fixed(2.0 * PI, 2.0 * PI / 4000.0);
        let traj = evolve_with(&DensityMatrix::pure_z_up(), &mut drive, &cfg, f64::INFINITY).unwrap();
        for s in &traj.samples {
            assert!((s.purity - 1.0).abs() <= 1e-7);
        }
    }

    #[test]
    fn numerical_purity_derivative_matches_generator_rate() {
        let q = QubitParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let b = BathParams::new(0.02, 5.0, 2.0).unwrap();
        let table = KernelTable::build(&b, 2.0, 1e-10).unwrap();
        let dt = 1e-3;
        let traj = evolve_with_table(&DensityMatrix::plus_x(), &q, &table, &EvolveConfig::fixed(2.0, dt)).unwrap();
        let mut drive = PhysicalDrive::new(q, &table, 1e-11);
        for i in (10..1990).step_by(97) {
            let s = &traj.samples[i];
            let p = |j: usize| traj.samples[j].purity;
            let numeric = (p(i - 2) - 8.0 * p(i - 1) + 8.0 * p(i + 1) - p(i + 2)) / (12.0 * dt);
            let g = drive.terms(s.t).unwrap();
            let rate = purity_rate_generator(&s.rho, &g.heff, &g.coeffs);
            assert!((numeric - rate).abs() < 1e-5, "t={} numeric={numeric} rate={rate}", s.t);
        }
    }

    #[test]
    fn trace_formula_tracks_trajectory_without_cross_terms() {
        let q = QubitParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let b = BathParams::new(0.02, 5.0, 2.0).unwrap();
        let table = KernelTable::build(&b, 2.0, 1e-10).unwrap();
        let mut physical = PhysicalDrive::new(q, &table, 1e-11);
        let mut drive = |t: f64| {
            let c = physical.coefficients(t)?;
            Ok(GeneratorTerms {
                heff: HeffCoeffs::at(&q, t),
                coeffs: CoefficientSet { f: 0.0, g: 0.0, ..c },
            })
        };
        let dt = 1e-3;
        let mut cfg = EvolveConfig::fixed(2.0, dt);
        cfg.r2_in_last_term = true;
        let traj = evolve_with(&DensityMatrix::plus_x(), &mut drive, &cfg, f64::INFINITY).unwrap();
        let p = |j: usize| traj.samples[j].purity;
        for i in (10..1990).step_by(97) {
            let numeric = (p(i - 2) - 8.0 * p(i - 1) + 8.0 * p(i + 1) - p(i + 2)) / (12.0 * dt);
            let c = CoefficientSet {
                f: 0.0,
                g: 0.0,
                ..traj.samples[i].coeffs
            };
            let rate = purity_rate_exact(&traj.samples[i].rho, &c, true);
            assert!(
                (numeric - rate).abs() < 1e-5,
                "t={} numeric={numeric} rate={rate}",
                traj.samples[i].t
            );
        }
    }
}
