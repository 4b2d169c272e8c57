//! Bloch angles, spinors and density matrices, with the maps between them.
//!
//! The three pictures of a pure spin-½ state are tied together by
//!
//! * `m = (sinθ cosφ, sinθ sinφ, cosθ)`,
//! * `ρ = ½(m·σ + σ0)`,
//! * `|ψ⟩ = (cos θ/2, sin θ/2 · e^{iφ})` with `ρ = |ψ⟩⟨ψ|`.
//!
//! At the poles φ carries no information and is reported as 0. Spinors read
//! back from a density matrix carry a fixed gauge: the first component with
//! modulus above `1e-8` is real and positive.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::pauli::{pauli_components, sigma_0, vec_to_pauli, Mat2, Vec3};
use crate::tolerances;
use crate::{Error, Result};

/// Polar angle `theta ∈ [0, π]` and azimuth `phi ∈ [0, 2π)`, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochAngles {
    theta: f64,
    phi: f64,
}

impl BlochAngles {
    /// Validates `theta` and wraps `phi` into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !(0.0..=PI).contains(&theta) {
            return Err(Error::Domain(format!(
                "polar angle {theta} outside [0, pi]"
            )));
        }
        if !phi.is_finite() {
            return Err(Error::Domain(format!("azimuth {phi} is not finite")));
        }
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        if theta == 0.0 || theta == PI {
            phi = 0.0;
        }
        Ok(Self { theta, phi })
    }

    /// Angles of the direction of `v`. Fails for zero or non-finite input.
    pub fn from_vector(v: Vec3) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::Domain("non-finite vector".into()));
        }
        let rho = v.x.hypot(v.y);
        if rho == 0.0 && v.z == 0.0 {
            return Err(Error::Domain("zero vector has no direction".into()));
        }
        let theta = rho.atan2(v.z);
        let phi = if rho <= 1e-15 * v.norm() {
            0.0
        } else {
            v.y.atan2(v.x)
        };
        Self::new(theta, phi)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

impl<'de> Deserialize<'de> for BlochAngles {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            theta: f64,
            #[serde(default)]
            phi: f64,
        }
        let raw = Raw::deserialize(d)?;
        BlochAngles::new(raw.theta, raw.phi).map_err(serde::de::Error::custom)
    }
}

/// Two-component state vector on the `|+z⟩, |−z⟩` basis.
///
/// Normalization is not enforced by the type: integrators carry spinors whose
/// norm drifts, and that drift is a measured quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor {
    pub up: Complex64,
    pub down: Complex64,
}

impl Spinor {
    pub const PLUS_Z: Spinor = Spinor::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    pub const MINUS_Z: Spinor = Spinor::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));

    pub const fn new(up: Complex64, down: Complex64) -> Self {
        Self { up, down }
    }

    pub fn as_array(&self) -> [Complex64; 2] {
        [self.up, self.down]
    }

    pub fn from_array(a: [Complex64; 2]) -> Self {
        Self::new(a[0], a[1])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.up.norm_sqr() + self.down.norm_sqr()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Spinor) -> Complex64 {
        self.up.conj() * other.up + self.down.conj() * other.down
    }

    pub fn scale(&self, s: Complex64) -> Spinor {
        Spinor::new(self.up * s, self.down * s)
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Spinor) -> Spinor {
        Spinor::new(self.up + other.up * s, self.down + other.down * s)
    }

    /// `ψψ†`, without any normalization check.
    pub fn outer(&self) -> Mat2 {
        Mat2::outer(self.as_array(), self.as_array())
    }

    pub fn is_finite(&self) -> bool {
        self.up.is_finite() && self.down.is_finite()
    }

    pub fn max_abs_diff(&self, other: &Spinor) -> f64 {
        (self.up - other.up)
            .norm()
            .max((self.down - other.down).norm())
    }
}

/// 2×2 Hermitian, unit-trace matrix with spectrum in `[0, 1]`.
///
/// Mixed states are representable; purity is a diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat2);

impl DensityMatrix {
    pub fn new(m: Mat2) -> Result<Self> {
        let herm = m.hermiticity_defect();
        if !(herm <= tolerances::DENSITY_STRUCTURE) {
            return Err(Error::Domain(format!(
                "density matrix not Hermitian (defect {herm:e})"
            )));
        }
        let tr = (m.trace() - 1.0).norm();
        if !(tr <= tolerances::DENSITY_STRUCTURE) {
            return Err(Error::Domain(format!("density matrix trace off by {tr:e}")));
        }
        let rho = Self(m);
        let [lo, hi] = rho.eigenvalues();
        let slack = tolerances::DENSITY_SPECTRUM;
        if lo < -slack || hi > 1.0 + slack {
            return Err(Error::Domain(format!(
                "eigenvalues [{lo}, {hi}] outside [0, 1]"
            )));
        }
        Ok(rho)
    }

    /// `½(m·σ + σ0)` for any `|m| ≤ 1`, pure or mixed.
    pub fn from_bloch_ball(m: Vec3) -> Result<Self> {
        if !m.is_finite() || m.norm() > 1.0 + tolerances::UNIT_NORM {
            return Err(Error::Domain(format!(
                "Bloch vector {m} outside the unit ball"
            )));
        }
        Ok(Self(bloch_to_matrix(m)))
    }

    /// `½σ0`
    pub fn maximally_mixed() -> Self {
        Self(sigma_0().scale_re(0.5))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> [f64; 2] {
        hermitian_eigenvalues(&self.0)
    }
}

impl From<DensityMatrix> for Mat2 {
    fn from(d: DensityMatrix) -> Mat2 {
        d.0
    }
}

pub(crate) fn bloch_to_matrix(m: Vec3) -> Mat2 {
    (vec_to_pauli(m) + sigma_0()).scale_re(0.5)
}

/// Bloch components of an arbitrary matrix read as `½(m·σ + σ0)`.
pub(crate) fn matrix_to_bloch(rho: &Mat2) -> Vec3 {
    pauli_components(&(rho.scale_re(2.0) - sigma_0()))
}

/// Ascending eigenvalues of a 2×2 Hermitian matrix (imaginary diagonal parts ignored).
pub(crate) fn hermitian_eigenvalues(m: &Mat2) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
    let half_tr = 0.5 * (a + d);
    let r = (0.5 * (a - d)).hypot(b.norm());
    [half_tr - r, half_tr + r]
}

pub fn bloch_from_angles(a: BlochAngles) -> Vec3 {
    let (st, ct) = a.theta.sin_cos();
    let (sp, cp) = a.phi.sin_cos();
    Vec3::new(st * cp, st * sp, ct)
}

/// `ρ = ½(m·σ + σ0)` for a unit Bloch vector.
pub fn density_from_bloch(m: Vec3) -> Result<DensityMatrix> {
    if !m.is_finite() || !m.is_unit(tolerances::UNIT_NORM) {
        return Err(Error::Domain(format!(
            "Bloch vector {m} is not a unit vector"
        )));
    }
    Ok(DensityMatrix(bloch_to_matrix(m)))
}

/// `m = vec(2ρ − σ0)`; the length is below 1 for mixed states.
pub fn bloch_from_density(rho: &DensityMatrix) -> Vec3 {
    matrix_to_bloch(&rho.0)
}

/// `(cos θ/2, sin θ/2 · e^{iφ})`
pub fn spinor_from_angles(a: BlochAngles) -> Spinor {
    let (s, c) = (0.5 * a.theta).sin_cos();
    Spinor::new(Complex64::new(c, 0.0), Complex64::from_polar(s, a.phi))
}

/// `ψ†σψ`. Equals the Bloch vector of `ψψ†` without normalizing.
pub fn bloch_from_spinor(psi: &Spinor) -> Vec3 {
    let cross = psi.up.conj() * psi.down;
    Vec3::new(
        2.0 * cross.re,
        2.0 * cross.im,
        psi.up.norm_sqr() - psi.down.norm_sqr(),
    )
}

/// `ρ = ψψ†` for a normalized spinor.
pub fn density_from_spinor(psi: &Spinor) -> Result<DensityMatrix> {
    let n = psi.norm_sqr();
    if !n.is_finite() || (n - 1.0).abs() > tolerances::UNIT_NORM {
        return Err(Error::Domain(format!("spinor norm^2 {n} is not 1")));
    }
    Ok(DensityMatrix(psi.outer()))
}

/// Recovers `ψ` from a pure `ρ = ψψ†`, up to the fixed global phase.
pub fn spinor_from_density(rho: &DensityMatrix) -> Result<Spinor> {
    let p = purity(rho);
    if (p - 1.0).abs() > tolerances::PURE_STATE {
        return Err(Error::Purity { purity: p });
    }
    let m = rho.matrix();
    // Column j of ψψ† is ψ·conj(ψj); take the column with the larger diagonal.
    let j = if m[(0, 0)].re >= m[(1, 1)].re { 0 } else { 1 };
    let scale = 1.0 / m[(j, j)].re.sqrt();
    let v = Spinor::new(m[(0, j)] * scale, m[(1, j)] * scale);
    Ok(fix_gauge(v))
}

/// Rotates the global phase so the first component with modulus above 1e-8
/// is real and positive.
pub(crate) fn fix_gauge(v: Spinor) -> Spinor {
    let lead = if v.up.norm() > 1e-8 { v.up } else { v.down };
    let r = lead.norm();
    if r == 0.0 {
        return v;
    }
    v.scale(lead.conj() / r)
}

/// `tr(ρ²)`
pub fn purity(rho: &DensityMatrix) -> f64 {
    (rho.0 * rho.0).trace().re
}

/// `½ Σ singular values of (ρ1 − ρ2)`, evaluated as `½|m1 − m2|`.
pub fn trace_distance(r1: &DensityMatrix, r2: &DensityMatrix) -> f64 {
    0.5 * bloch_from_density(r1).distance(bloch_from_density(r2))
}
