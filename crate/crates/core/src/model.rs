//! Domain types for the driven qubit and its Ohmic environment, plus the
//! 2×2 operator algebra used everywhere else.
//!
//! All quantities use natural units with ħ = k_B = 1. Energies are expressed
//! in units of the tunnelling splitting Δ and times in units of 1/Δ; the
//! figure convention of 5/Δ is only applied at the I/O boundary through
//! [`TimeUnit`].

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DsbError, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;

/// Fixed unit conventions of the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units;

impl Units {
    pub const HBAR: f64 = 1.0;
    pub const K_B: f64 = 1.0;
    /// Multiple of 1/Δ used as the time unit when reproducing figures.
    pub const FIGURE_TIME_UNIT: f64 = 5.0;
}

/// Unit in which times are read from and written to external files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    /// Times in units of 5/Δ.
    #[default]
    FiveOverDelta,
    /// Times in units of 1/Δ.
    InverseDelta,
}

impl TimeUnit {
    /// Internal time (ħ = 1, energies as given) corresponding to one I/O time unit.
    pub fn scale(self, delta: f64) -> f64 {
        match self {
            TimeUnit::FiveOverDelta => Units::FIGURE_TIME_UNIT / delta,
            TimeUnit::InverseDelta => 1.0 / delta,
        }
    }

    pub fn to_internal(self, t_io: f64, delta: f64) -> f64 {
        t_io * self.scale(delta)
    }

    pub fn from_internal(self, t: f64, delta: f64) -> f64 {
        t / self.scale(delta)
    }
}

/// The driven two-level system H_S = ε(t)σ_z/2 − Δσ_x/2 with
/// ε(t) = ε₀ + s cos(Ωt).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitParams {
    pub epsilon0: f64,
    pub delta: f64,
    pub s: f64,
    pub omega_drive: f64,
}

impl QubitParams {
    pub fn new(epsilon0: f64, delta: f64, s: f64, omega_drive: f64) -> Result<Self> {
        let q = QubitParams {
            epsilon0,
            delta,
            s,
            omega_drive,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("epsilon0", self.epsilon0),
            ("delta", self.delta),
            ("s", self.s),
            ("omega_drive", self.omega_drive),
        ] {
            if !v.is_finite() {
                return Err(DsbError::invalid(field, "must be finite"));
            }
        }
        if self.delta <= 0.0 {
            return Err(DsbError::invalid("delta", "must be > 0"));
        }
        if self.s < 0.0 {
            return Err(DsbError::invalid("s", "must be >= 0"));
        }
        if self.s > 0.0 && self.omega_drive <= 0.0 {
            return Err(DsbError::invalid(
                "omega_drive",
                "must be > 0 when the drive amplitude s is non-zero",
            ));
        }
        Ok(())
    }

    /// Instantaneous bias ε(t) = ε₀ + s cos(Ωt).
    pub fn epsilon_t(&self, t: f64) -> f64 {
        self.epsilon0 + self.s * (self.omega_drive * t).cos()
    }

    /// Accumulated bias phase φ(t) = ∫₀ᵗ ε = ε₀t + (s/Ω) sin(Ωt).
    pub fn bias_phase(&self, t: f64) -> f64 {
        if self.s == 0.0 {
            self.epsilon0 * t
        } else {
            self.epsilon0 * t + self.s / self.omega_drive * (self.omega_drive * t).sin()
        }
    }

    /// One bare Rabi period 2π/Δ, the default short-time validity window.
    pub fn short_time_horizon(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.delta
    }
}

/// Ohmic environment J(ω) = 2παω e^{−ω/Λ} at inverse temperature β.
/// `beta = f64::INFINITY` selects zero temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathParams {
    pub alpha: f64,
    pub cutoff: f64,
    #[serde(with = "extended_real")]
    pub beta: f64,
}

impl BathParams {
    pub fn new(alpha: f64, cutoff: f64, beta: f64) -> Result<Self> {
        let b = BathParams { alpha, cutoff, beta };
        b.validate()?;
        Ok(b)
    }

    pub fn zero_temperature(alpha: f64, cutoff: f64) -> Result<Self> {
        Self::new(alpha, cutoff, f64::INFINITY)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(DsbError::invalid("alpha", "must be finite and >= 0"));
        }
        if !self.cutoff.is_finite() || self.cutoff <= 0.0 {
            return Err(DsbError::invalid("cutoff", "must be finite and > 0"));
        }
        if self.beta.is_nan() || self.beta <= 0.0 {
            return Err(DsbError::invalid("beta", "must be > 0 or +inf"));
        }
        Ok(())
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.beta == f64::INFINITY
    }
}

/// Serde adapter for reals that may be `+inf`, which JSON cannot express as a
/// number. Infinite values are written as the string `"inf"`.
pub mod extended_real {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub(crate) fn parse(repr: &str) -> Option<f64> {
        match repr.trim() {
            "inf" | "+inf" | "infinity" | "Infinity" => Some(f64::INFINITY),
            _ => None,
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, ser: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            ser.serialize_str("inf")
        } else {
            ser.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        match Repr::deserialize(de)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(s) => {
                parse(&s).ok_or_else(|| D::Error::custom(format!("expected a number or \"inf\", got {s:?}")))
            }
        }
    }

    /// Same adapter for a list of values.
    pub mod vec {
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};

        #[derive(Deserialize)]
        #[serde(transparent)]
        struct Item(#[serde(with = "super")] f64);

        pub fn serialize<S: Serializer>(v: &[f64], ser: S) -> Result<S::Ok, S::Error> {
            let mut seq = ser.serialize_seq(Some(v.len()))?;
            for x in v {
                if *x == f64::INFINITY {
                    seq.serialize_element("inf")?;
                } else {
                    seq.serialize_element(x)?;
                }
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<f64>, D::Error> {
            let items = Vec::<Item>::deserialize(de)?;
            Ok(items.into_iter().map(|i| i.0).collect())
        }
    }
}

/// Dense 2×2 complex matrix, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);
    pub const SIGMA_X: Mat2 = Mat2([[ZERO, ONE], [ONE, ZERO]]);
    pub const SIGMA_Y: Mat2 = Mat2([[ZERO, Complex64::new(0.0, -1.0)], [I, ZERO]]);
    pub const SIGMA_Z: Mat2 = Mat2([[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]]);

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    /// w_x σ_x + w_y σ_y + w_z σ_z.
    pub fn pauli_combination(wx: f64, wy: f64, wz: f64) -> Self {
        Mat2::new(
            Complex64::new(wz, 0.0),
            Complex64::new(wx, -wy),
            Complex64::new(wx, wy),
            Complex64::new(-wz, 0.0),
        )
    }

    /// exp(−i·angle·σ) for a Pauli matrix σ.
    pub fn pauli_rotation(sigma: &Mat2, angle: f64) -> Self {
        Mat2::IDENTITY.scale(angle.cos().into()) + sigma.scale(Complex64::new(0.0, -angle.sin()))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[i][j]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn scale(&self, k: Complex64) -> Self {
        let m = &self.0;
        Mat2::new(k * m[0][0], k * m[0][1], k * m[1][0], k * m[1][1])
    }

    pub fn commutator(&self, other: &Mat2) -> Self {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Mat2) -> Self {
        *self * *other + *other * *self
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        m
    }

    pub fn max_norm(&self) -> f64 {
        self.max_abs_diff(&Mat2::ZERO)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    /// Real Pauli weights (tr(Aσ_x), tr(Aσ_y), tr(Aσ_z))/2 of the Hermitian part.
    pub fn pauli_weights(&self) -> [f64; 3] {
        let m = &self.0;
        let off = (m[0][1] + m[1][0].conj()) * 0.5;
        [off.re, -off.im, 0.5 * (m[0][0].re - m[1][1].re)]
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, r: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &r.0);
        Mat2::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, r: Mat2) {
        *self = *self + r;
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, r: Mat2) -> Mat2 {
        self + (-r)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale((-1.0).into())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, r: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &r.0);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, k: f64) -> Mat2 {
        self.scale(k.into())
    }
}

/// Bloch-sphere coordinates (⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn to_density_matrix(&self) -> DensityMatrix {
        DensityMatrix {
            elements: Mat2::new(
                Complex64::new(0.5 * (1.0 + self.z), 0.0),
                Complex64::new(0.5 * self.x, -0.5 * self.y),
                Complex64::new(0.5 * self.x, 0.5 * self.y),
                Complex64::new(0.5 * (1.0 - self.z), 0.0),
            ),
        }
    }

    /// Purity from the Bloch representation, (1 + |v|²)/2.
    pub fn purity(&self) -> f64 {
        0.5 * (1.0 + self.norm_sqr())
    }
}

/// Runs `v` through the density-matrix representation and back.
pub fn bloch_round_trip(v: BlochVector) -> BlochVector {
    v.to_density_matrix().bloch()
}

/// A 2×2 Hermitian, unit-trace matrix. Positivity is not enforced; see
/// [`DensityMatrix::min_eigenvalue`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    elements: Mat2,
}

impl DensityMatrix {
    pub fn new(elements: Mat2) -> Result<Self> {
        let herm = elements.hermiticity_defect();
        if !(herm <= HERMITIAN_TOL) {
            return Err(DsbError::invalid("rho", format!("not Hermitian (defect {herm:e})")));
        }
        let tr = elements.trace();
        if !((tr - 1.0).norm() <= TRACE_TOL) {
            return Err(DsbError::invalid("rho", format!("trace {tr} is not 1")));
        }
        Ok(DensityMatrix { elements })
    }

    /// Wraps a matrix produced by a trace- and Hermiticity-preserving
    /// integrator without re-checking the tight construction tolerances.
    pub(crate) fn from_evolved(elements: Mat2) -> Self {
        DensityMatrix { elements }
    }

    pub fn pure_z_up() -> Self {
        BlochVector::new(0.0, 0.0, 1.0).to_density_matrix()
    }

    pub fn plus_x() -> Self {
        BlochVector::new(1.0, 0.0, 0.0).to_density_matrix()
    }

    pub fn maximally_mixed() -> Self {
        BlochVector::new(0.0, 0.0, 0.0).to_density_matrix()
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.elements
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.elements.get(i, j)
    }

    pub fn trace(&self) -> Complex64 {
        self.elements.trace()
    }

    pub fn bloch(&self) -> BlochVector {
        let m = &self.elements.0;
        let off = m[1][0] + m[0][1].conj();
        BlochVector::new(off.re, off.im, (m[0][0] - m[1][1]).re)
    }

    /// tr(ρ²) by direct matrix multiplication.
    pub fn purity(&self) -> f64 {
        (self.elements * self.elements).trace().re
    }

    /// tr(ρ) − tr(ρ²).
    pub fn linear_entropy(&self) -> f64 {
        self.trace().re - self.purity()
    }

    /// Smaller eigenvalue of ρ, (tr ρ − |v|)/2; negative values flag a
    /// non-positive state.
    pub fn min_eigenvalue(&self) -> f64 {
        0.5 * (self.trace().re - self.bloch().norm())
    }
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    rho.linear_entropy()
}
