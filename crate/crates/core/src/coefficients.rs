//! Driven-qubit operators and the time-dependent master-equation
//! coefficients.
//!
//! With the shared bias phase φ(t) = ε₀t + (s/Ω) sin(Ωt) and the chirp
//! angle θ(t) = (Δt/2)·φ(t), the Heisenberg-picture coupling operator is
//! σ_z(t) = w_x σ_x + w_y σ_y + w_z σ_z with
//!
//! ```text
//! w_x = −cos(Δt) sin θ,   w_y = −sin(Δt),   w_z = cos(Δt) cos θ
//! ```
//!
//! and the six coefficients are the kernel-weighted integrals
//!
//! ```text
//! D = ∫₀ᵗ ν w_z    f = ∫₀ᵗ ν w_y    G = ∫₀ᵗ ν w_x
//! Ω̃ = ∫₀ᵗ η w_z    r₁ = ∫₀ᵗ η w_x   r₂ = ∫₀ᵗ η w_y
//! ```
//!
//! all taken over the integration variable t₁.

use std::collections::BTreeMap;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{DsbError, Result};
use crate::kernels::KernelTable;
use crate::model::{Mat2, QubitParams};
use crate::quadrature::{integrate, QuadConfig};

/// A value together with the short-time validity verdict for the instant it
/// was computed at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flagged<T> {
    pub value: T,
    /// `true` once t exceeds the short-time horizon of the expansion.
    pub beyond_horizon: bool,
}

impl<T> Flagged<T> {
    fn at(q: &QubitParams, t: f64, value: T) -> Self {
        Flagged {
            value,
            beyond_horizon: t.abs() > q.short_time_horizon(),
        }
    }
}

/// Weights of H_eff = a₁σ_x + b₁σ_y + c₁σ_z.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HeffCoeffs {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
}

impl HeffCoeffs {
    pub fn at(q: &QubitParams, t: f64) -> Self {
        let delta = q.delta;
        let phi = q.bias_phase(t);
        let bracket = delta * phi + delta * t * q.epsilon_t(t);
        let (sin_phi, cos_phi) = phi.sin_cos();
        let (sin_dt, cos_dt) = (delta * t).sin_cos();
        HeffCoeffs {
            a1: 0.5 * delta * cos_phi + 0.25 * bracket * cos_dt * sin_phi,
            b1: 0.5 * delta * sin_phi - 0.25 * bracket * cos_dt * cos_phi,
            c1: -0.5 * delta * q.epsilon_t(t) + 0.25 * bracket * sin_dt,
        }
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::pauli_combination(self.a1, self.b1, self.c1)
    }
}

pub fn heff_coeffs(q: &QubitParams, t: f64) -> Flagged<HeffCoeffs> {
    Flagged::at(q, t, HeffCoeffs::at(q, t))
}

/// Decomposition of σ_z(t) over (σ_x, σ_y, σ_z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliWeights {
    pub wx: f64,
    pub wy: f64,
    pub wz: f64,
}

impl PauliWeights {
    #[inline]
    pub fn at(q: &QubitParams, t: f64) -> Self {
        let theta = 0.5 * q.delta * t * q.bias_phase(t);
        let (sin_dt, cos_dt) = (q.delta * t).sin_cos();
        let (sin_th, cos_th) = theta.sin_cos();
        PauliWeights {
            wx: -cos_dt * sin_th,
            wy: -sin_dt,
            wz: cos_dt * cos_th,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.wx * self.wx + self.wy * self.wy + self.wz * self.wz
    }
}

pub fn sigma_z_heisenberg(q: &QubitParams, t: f64) -> Flagged<PauliWeights> {
    Flagged::at(q, t, PauliWeights::at(q, t))
}

/// Short-time propagator with the third-order term dropped:
/// U = exp(−iφσ_z/2) · exp(iΔtσ_x/2) · exp(−i(Δ/4)·t·φ·σ_y).
pub fn evolution_operator(q: &QubitParams, t: f64) -> Flagged<Mat2> {
    let phi = q.bias_phase(t);
    let u = Mat2::pauli_rotation(&Mat2::SIGMA_Z, 0.5 * phi)
        * Mat2::pauli_rotation(&Mat2::SIGMA_X, -0.5 * q.delta * t)
        * Mat2::pauli_rotation(&Mat2::SIGMA_Y, 0.25 * q.delta * t * phi);
    Flagged::at(q, t, u)
}

/// The six master-equation coefficients at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CoefficientSet {
    /// Decoherence coefficient multiplying [σ_z,[σ_z,ρ]].
    pub d: f64,
    pub f: f64,
    pub g: f64,
    /// Frequency shift Ω̃.
    pub omega_shift: f64,
    pub r1: f64,
    pub r2: f64,
}

impl CoefficientSet {
    pub const ZERO: CoefficientSet = CoefficientSet {
        d: 0.0,
        f: 0.0,
        g: 0.0,
        omega_shift: 0.0,
        r1: 0.0,
        r2: 0.0,
    };

    fn from_array(a: [f64; 6]) -> Self {
        CoefficientSet {
            d: a[0],
            f: a[1],
            g: a[2],
            omega_shift: a[3],
            r1: a[4],
            r2: a[5],
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.d, self.f, self.g, self.omega_shift, self.r1, self.r2]
    }
}

impl Add for CoefficientSet {
    type Output = CoefficientSet;
    fn add(self, o: CoefficientSet) -> CoefficientSet {
        let (a, b) = (self.to_array(), o.to_array());
        CoefficientSet::from_array(std::array::from_fn(|k| a[k] + b[k]))
    }
}

impl Sub for CoefficientSet {
    type Output = CoefficientSet;
    fn sub(self, o: CoefficientSet) -> CoefficientSet {
        let (a, b) = (self.to_array(), o.to_array());
        CoefficientSet::from_array(std::array::from_fn(|k| a[k] - b[k]))
    }
}

/// ∫_a^b of the six coefficient integrands, panels aligned with the table
/// nodes so the piecewise-cubic kernels are smooth on every panel.
fn integrate_segment(q: &QubitParams, table: &KernelTable, a: f64, b: f64, tol: f64) -> Result<CoefficientSet> {
    if b <= a {
        return Ok(CoefficientSet::ZERO);
    }
    let grid = table.grid();
    let lo = grid.partition_point(|&g| g <= a);
    let hi = grid.partition_point(|&g| g < b);
    let mut breakpoints = Vec::with_capacity(hi.saturating_sub(lo) + 2);
    breakpoints.push(a);
    breakpoints.extend_from_slice(&grid[lo..hi.max(lo)]);
    breakpoints.push(b);

    let integrand = |t1: f64| {
        let (nu, eta) = table.interpolate(t1);
        let w = PauliWeights::at(q, t1);
        [nu * w.wz, nu * w.wy, nu * w.wx, eta * w.wz, eta * w.wx, eta * w.wy]
    };
    let est = integrate(integrand, &breakpoints, &QuadConfig::uniform(tol))?;
    Ok(CoefficientSet::from_array(est.value))
}

/// Evaluates the six coefficients at time `t` from tabulated kernels, with
/// absolute quadrature error ≤ `tol` per coefficient.
pub fn coefficient_set(q: &QubitParams, table: &KernelTable, t: f64, tol: f64) -> Result<CoefficientSet> {
    if !(t >= 0.0) {
        return Err(DsbError::invalid("t", "coefficients are defined for t >= 0"));
    }
    if !(tol > 0.0) {
        return Err(DsbError::invalid("tol", "must be > 0"));
    }
    table.check_horizon(t)?;
    integrate_segment(q, table, 0.0, t, tol)
}

/// Memoised coefficient evaluation for a single trajectory. A request at t
/// extends the closest cached instant below t by one segment integral, so a
/// monotone sweep costs a single pass over [0, t_max].
#[derive(Debug)]
pub struct CoefficientCache<'a> {
    qubit: QubitParams,
    table: &'a KernelTable,
    tol: f64,
    memo: BTreeMap<u64, CoefficientSet>,
}

impl<'a> CoefficientCache<'a> {
    /// `tol` bounds the accumulated error over the whole table horizon.
    pub fn new(qubit: QubitParams, table: &'a KernelTable, tol: f64) -> Self {
        let mut memo = BTreeMap::new();
        memo.insert(0.0f64.to_bits(), CoefficientSet::ZERO);
        CoefficientCache {
            qubit,
            table,
            tol,
            memo,
        }
    }

    pub fn qubit(&self) -> &QubitParams {
        &self.qubit
    }

    pub fn table(&self) -> &KernelTable {
        self.table
    }

    pub fn get(&mut self, t: f64) -> Result<CoefficientSet> {
        if !(t >= 0.0) {
            return Err(DsbError::invalid("t", "coefficients are defined for t >= 0"));
        }
        self.table.check_horizon(t)?;
        // +0.0 and positive floats order the same as their bit patterns
        let key = (t + 0.0).to_bits();
        if let Some(c) = self.memo.get(&key) {
            return Ok(*c);
        }
        let (&k0, &base) = self.memo.range(..key).next_back().expect("t = 0 is always cached");
        let t0 = f64::from_bits(k0);
        let seg_tol = self.tol * ((t - t0) / self.table.horizon()).max(1e-6);
        let c = base + integrate_segment(&self.qubit, self.table, t0, t, seg_tol)?;
        self.memo.insert(key, c);
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.memo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memo.is_empty()
    }
}
