//! Ohmic spectral density and the bath correlation kernels
//!
//! ```text
//! ν(t) = ∫₀^∞ dω J(ω) cos(ωt) coth(βω/2)      (noise, even in t)
//! η(t) = ∫₀^∞ dω J(ω) sin(ωt)                 (dissipation, odd in t)
//! J(ω) = 2πα ω e^{−ω/Λ}
//! ```
//!
//! Both are evaluated by adaptive quadrature in the scaled frequency
//! x = ω/Λ, truncated at x = 40 where the exponential cutoff leaves a
//! relative tail below 1e-15. [`KernelTable`] caches the kernels on a time
//! grid for the nested coefficient integrals.

use std::f64::consts::PI;

use crate::error::{DsbError, Result};
use crate::model::BathParams;
use crate::quadrature::{integrate, QuadConfig};

/// Default absolute accuracy of kernel values.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Upper limit of the scaled frequency integral.
const X_MAX: f64 = 40.0;
/// Oscillation periods of cos(cx) covered by one initial quadrature panel.
const PANEL_PERIODS: f64 = 3.0;
const LAURENT_THRESHOLD: f64 = 1e-3;
const MAX_REFINE_DEPTH: u32 = 24;
/// coth(y) rounds to exactly 1 beyond this argument.
const COTH_SATURATION: f64 = 19.0;

/// J(ω) = 2πα ω e^{−ω/Λ}.
pub fn spectral_density(b: &BathParams, omega: f64) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(DsbError::invalid("omega", "spectral density needs omega >= 0"));
    }
    if omega == f64::INFINITY {
        return Ok(0.0);
    }
    Ok(2.0 * PI * b.alpha * omega * (-omega / b.cutoff).exp())
}

/// coth(y), switching to the Laurent series 1/y + y/3 − y³/45 for small
/// arguments.
pub fn coth(y: f64) -> f64 {
    if y.abs() < LAURENT_THRESHOLD {
        1.0 / y + y / 3.0 - y * y * y / 45.0
    } else {
        1.0 / y.tanh()
    }
}

/// x·coth(kx), finite at x = 0 where it tends to 1/k.
fn x_coth(x: f64, k: f64) -> f64 {
    let y = k * x;
    if y < LAURENT_THRESHOLD {
        1.0 / k + k * x * x / 3.0 - k * k * k * x.powi(4) / 45.0
    } else if y > COTH_SATURATION {
        x
    } else {
        x / y.tanh()
    }
}

/// ν, η and their time derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KernelSample {
    pub nu: f64,
    pub eta: f64,
    pub dnu: f64,
    pub deta: f64,
}

/// Evaluates ν(t), η(t), ν'(t), η'(t) in one quadrature pass. Values carry
/// absolute error ≤ `tol`; derivatives carry ≤ `tol·Λ`.
pub fn kernel_sample(b: &BathParams, t: f64, tol: f64) -> Result<KernelSample> {
    if !t.is_finite() {
        return Err(DsbError::invalid("t", "must be finite"));
    }
    if !(tol > 0.0) {
        return Err(DsbError::invalid("tol", "must be > 0"));
    }
    if b.alpha == 0.0 {
        return Ok(KernelSample::default());
    }
    let tau = t.abs();
    let lambda = b.cutoff;
    let c = lambda * tau;
    let prefactor = 2.0 * PI * b.alpha * lambda * lambda;
    let scaled_tol = tol / prefactor;

    let zero_temperature = b.is_zero_temperature();
    let k = 0.5 * b.beta * lambda;
    let integrand = |x: f64| {
        let decay = (-x).exp();
        let (s, co) = (c * x).sin_cos();
        let thermal = if zero_temperature { x } else { x_coth(x, k) };
        [
            decay * thermal * co,
            x * decay * s,
            -x * decay * thermal * s,
            x * x * decay * co,
        ]
    };

    let width = if c > 0.0 {
        (PANEL_PERIODS * 2.0 * PI / c).min(2.0)
    } else {
        2.0
    };
    let panels = (X_MAX / width).ceil() as usize;
    let breakpoints: Vec<f64> = (0..=panels).map(|i| X_MAX * i as f64 / panels as f64).collect();

    let est = integrate(integrand, &breakpoints, &QuadConfig::uniform(scaled_tol))?;
    let [i_nu, i_eta, i_dnu, i_deta] = est.value;
    let sign = if t < 0.0 { -1.0 } else { 1.0 };
    Ok(KernelSample {
        nu: prefactor * i_nu,
        eta: sign * prefactor * i_eta,
        dnu: sign * prefactor * lambda * i_dnu,
        deta: prefactor * lambda * i_deta,
    })
}

/// Noise kernel ν(t) by direct quadrature.
pub fn nu(b: &BathParams, t: f64, tol: f64) -> Result<f64> {
    kernel_sample(b, t, tol).map(|s| s.nu)
}

/// Dissipation kernel η(t) by direct quadrature.
pub fn eta(b: &BathParams, t: f64, tol: f64) -> Result<f64> {
    kernel_sample(b, t, tol).map(|s| s.eta)
}

/// Closed forms of the Ohmic-exponential kernels, used as reference values.
pub mod closed_form {
    use super::*;

    /// η(t) = 4παΛ³t / (1 + Λ²t²)², valid at any temperature.
    pub fn eta(b: &BathParams, t: f64) -> f64 {
        let l = b.cutoff;
        let d = 1.0 + l * l * t * t;
        4.0 * PI * b.alpha * l.powi(3) * t / (d * d)
    }

    /// ν(t) at β = ∞: 2παΛ²(1 − Λ²t²) / (1 + Λ²t²)².
    pub fn nu_zero_temperature(b: &BathParams, t: f64) -> f64 {
        let l = b.cutoff;
        let u = l * l * t * t;
        2.0 * PI * b.alpha * l * l * (1.0 - u) / ((1.0 + u) * (1.0 + u))
    }

    /// High-temperature limit βΛ ≪ 1: (4πα/β)·Λ / (1 + Λ²t²).
    pub fn nu_classical(b: &BathParams, t: f64) -> f64 {
        let l = b.cutoff;
        4.0 * PI * b.alpha / b.beta * l / (1.0 + l * l * t * t)
    }
}

/// ν and η tabulated on `[0, horizon]` with cubic Hermite interpolation
/// between nodes. The grid is refined until the interpolant reproduces a
/// directly computed midpoint to within `tol` in every cell.
#[derive(Debug, Clone)]
pub struct KernelTable {
    grid: Vec<f64>,
    nu: Vec<f64>,
    eta: Vec<f64>,
    dnu: Vec<f64>,
    deta: Vec<f64>,
    tol: f64,
}

impl KernelTable {
    pub fn build(b: &BathParams, t_max: f64, tol: f64) -> Result<Self> {
        b.validate()?;
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(DsbError::invalid(
                "t_max",
                "kernel table horizon must be finite and > 0",
            ));
        }
        if !(tol > 0.0) {
            return Err(DsbError::invalid("tol", "must be > 0"));
        }
        let h_max = (0.1 / b.cutoff).min(t_max / 512.0);
        let cells = (t_max / h_max).ceil() as usize;
        let quad_tol = 0.1 * tol;
        let sample = |t: f64| kernel_sample(b, t, quad_tol);

        let knots: Vec<f64> = (0..=cells).map(|i| t_max * i as f64 / cells as f64).collect();
        let mut grid = Vec::with_capacity(knots.len());
        let mut values = Vec::with_capacity(knots.len());
        let mut left = sample(0.0)?;
        grid.push(0.0);
        values.push(left);
        // Cells whose neighbour interpolated far below tolerance skip the
        // midpoint check, except for a periodic spot check.
        let mut last_err = f64::INFINITY;
        for (i, w) in knots.windows(2).enumerate() {
            let right = sample(w[1])?;
            if last_err < 1e-3 * tol && i % 16 != 0 {
                grid.push(w[1]);
                values.push(right);
            } else {
                last_err = refine(&sample, tol, (w[0], left), (w[1], right), 0, &mut grid, &mut values)?;
            }
            left = right;
        }

        let mut table = KernelTable {
            grid,
            nu: values.iter().map(|s| s.nu).collect(),
            eta: values.iter().map(|s| s.eta).collect(),
            dnu: values.iter().map(|s| s.dnu).collect(),
            deta: values.iter().map(|s| s.deta).collect(),
            tol,
        };
        table.eta[0] = 0.0;
        table.dnu[0] = 0.0;
        Ok(table)
    }

    /// Assembles a table from externally supplied nodes, e.g. to drive the
    /// coefficient integrals with a synthetic bath.
    pub fn from_samples(grid: Vec<f64>, samples: Vec<KernelSample>, tol: f64) -> Result<Self> {
        if grid.len() < 2 || grid.len() != samples.len() {
            return Err(DsbError::invalid(
                "grid",
                "need at least two nodes, one sample per node",
            ));
        }
        if grid[0] != 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(DsbError::invalid("grid", "must start at 0 and increase strictly"));
        }
        if samples[0].eta != 0.0 {
            return Err(DsbError::invalid("eta", "must vanish at t = 0"));
        }
        Ok(KernelTable {
            grid,
            nu: samples.iter().map(|s| s.nu).collect(),
            eta: samples.iter().map(|s| s.eta).collect(),
            dnu: samples.iter().map(|s| s.dnu).collect(),
            deta: samples.iter().map(|s| s.deta).collect(),
            tol,
        })
    }

    pub fn horizon(&self) -> f64 {
        *self.grid.last().expect("non-empty grid")
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn nu_values(&self) -> &[f64] {
        &self.nu
    }

    pub fn eta_values(&self) -> &[f64] {
        &self.eta
    }

    pub fn check_horizon(&self, t: f64) -> Result<()> {
        if t.is_finite() && t.abs() <= self.horizon() {
            Ok(())
        } else {
            Err(DsbError::HorizonExceeded {
                t,
                horizon: self.horizon(),
            })
        }
    }

    pub fn nu(&self, t: f64) -> Result<f64> {
        self.check_horizon(t)?;
        Ok(self.interpolate(t).0)
    }

    pub fn eta(&self, t: f64) -> Result<f64> {
        self.check_horizon(t)?;
        Ok(self.interpolate(t).1)
    }

    /// (ν(t), η(t)) without the horizon check; `|t|` must not exceed the
    /// horizon.
    #[inline]
    pub(crate) fn interpolate(&self, t: f64) -> (f64, f64) {
        let tau = t.abs();
        let n = self.grid.len();
        let i = self.grid.partition_point(|&g| g <= tau).clamp(1, n - 1) - 1;
        let (t0, t1) = (self.grid[i], self.grid[i + 1]);
        let h = t1 - t0;
        let s = (tau - t0) / h;
        let basis = hermite_basis(s);
        let nu = hermite(basis, h, self.nu[i], self.dnu[i], self.nu[i + 1], self.dnu[i + 1]);
        let eta = hermite(basis, h, self.eta[i], self.deta[i], self.eta[i + 1], self.deta[i + 1]);
        (nu, if t < 0.0 { -eta } else { eta })
    }
}

#[inline]
fn hermite_basis(s: f64) -> [f64; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    [
        2.0 * s3 - 3.0 * s2 + 1.0,
        s3 - 2.0 * s2 + s,
        -2.0 * s3 + 3.0 * s2,
        s3 - s2,
    ]
}

#[inline]
fn hermite(basis: [f64; 4], h: f64, y0: f64, m0: f64, y1: f64, m1: f64) -> f64 {
    basis[0] * y0 + basis[1] * h * m0 + basis[2] * y1 + basis[3] * h * m1
}

fn refine<F>(
    sample: &F,
    tol: f64,
    (t0, s0): (f64, KernelSample),
    (t1, s1): (f64, KernelSample),
    depth: u32,
    grid: &mut Vec<f64>,
    values: &mut Vec<KernelSample>,
) -> Result<f64>
where
    F: Fn(f64) -> Result<KernelSample>,
{
    let mid = 0.5 * (t0 + t1);
    let sm = sample(mid)?;
    let basis = hermite_basis(0.5);
    let h = t1 - t0;
    let nu_err = (hermite(basis, h, s0.nu, s0.dnu, s1.nu, s1.dnu) - sm.nu).abs();
    let eta_err = (hermite(basis, h, s0.eta, s0.deta, s1.eta, s1.deta) - sm.eta).abs();
    let err = nu_err.max(eta_err);
    if err > tol && depth < MAX_REFINE_DEPTH {
        let a = refine(sample, tol, (t0, s0), (mid, sm), depth + 1, grid, values)?;
        let b = refine(sample, tol, (mid, sm), (t1, s1), depth + 1, grid, values)?;
        Ok(a.max(b))
    } else {
        grid.push(mid);
        values.push(sm);
        grid.push(t1);
        values.push(s1);
        Ok(err)
    }
}
