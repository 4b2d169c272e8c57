//! Fixed-size complex 2×2 matrices, real 3-vectors, and the map between
//! them through the Pauli vector `σ = (σx, σy, σz)`.

use std::fmt;
use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::tolerances;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Real 3-vector. Used for Bloch vectors (dimensionless) and fields.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    /// `self + s * other`
    pub fn axpy(self, s: f64, other: Vec3) -> Vec3 {
        Vec3::new(
            self.x + s * other.x,
            self.y + s * other.y,
            self.z + s * other.z,
        )
    }

    /// Unit vector along `self`, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale(1.0 / n))
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn is_unit(self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v.scale(self)
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Complex 2×2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: [[Complex64; 2]; 2],
}

impl Mat2 {
    pub const ZERO: Mat2 = Mat2 {
        a: [[ZERO, ZERO], [ZERO, ZERO]],
    };
    pub const IDENTITY: Mat2 = Mat2 {
        a: [[ONE, ZERO], [ZERO, ONE]],
    };

    pub const fn new(a00: Complex64, a01: Complex64, a10: Complex64, a11: Complex64) -> Self {
        Self {
            a: [[a00, a01], [a10, a11]],
        }
    }

    pub fn from_real(a00: f64, a01: f64, a10: f64, a11: f64) -> Self {
        Self::new(a00.into(), a01.into(), a10.into(), a11.into())
    }

    /// Outer product `u v†`.
    pub fn outer(u: [Complex64; 2], v: [Complex64; 2]) -> Self {
        Self::new(
            u[0] * v[0].conj(),
            u[0] * v[1].conj(),
            u[1] * v[0].conj(),
            u[1] * v[1].conj(),
        )
    }

    pub fn dagger(&self) -> Mat2 {
        let a = &self.a;
        Mat2::new(
            a[0][0].conj(),
            a[1][0].conj(),
            a[0][1].conj(),
            a[1][1].conj(),
        )
    }

    pub fn trace(&self) -> Complex64 {
        self.a[0][0] + self.a[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0]
    }

    pub fn scale(&self, s: Complex64) -> Mat2 {
        self.map(|z| z * s)
    }

    pub fn scale_re(&self, s: f64) -> Mat2 {
        self.map(|z| z * s)
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Mat2) -> Mat2 {
        let mut out = *self;
        for (row, orow) in out.a.iter_mut().zip(other.a.iter()) {
            for (z, w) in row.iter_mut().zip(orow.iter()) {
                *z += w * s;
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Mat2 {
        let a = &self.a;
        Mat2::new(f(a[0][0]), f(a[0][1]), f(a[1][0]), f(a[1][1]))
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let a = &self.a;
        [
            a[0][0] * v[0] + a[0][1] * v[1],
            a[1][0] * v[0] + a[1][1] * v[1],
        ]
    }

    /// Largest entry-wise modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry-wise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.entries().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn entries(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.a.iter().flatten().copied()
    }

    /// Solves `self · x = rhs` by the closed-form inverse. `None` if singular.
    pub fn solve(&self, rhs: [Complex64; 2]) -> Option<[Complex64; 2]> {
        let det = self.det();
        if det.norm() == 0.0 || !det.is_finite() {
            return None;
        }
        let a = &self.a;
        Some([
            (a[1][1] * rhs[0] - a[0][1] * rhs[1]) / det,
            (a[0][0] * rhs[1] - a[1][0] * rhs[0]) / det,
        ])
    }
}

impl Index<(usize, usize)> for Mat2 {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.a[r][c]
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        self.axpy(1.0, &o)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self.axpy(-1.0, &o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.map(|z| -z)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.a, &o.a);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<Mat2> for Complex64 {
    type Output = Mat2;
    fn mul(self, m: Mat2) -> Mat2 {
        m.scale(self)
    }
}

impl Mul<Mat2> for f64 {
    type Output = Mat2;
    fn mul(self, m: Mat2) -> Mat2 {
        m.scale_re(self)
    }
}

pub fn sigma_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn sigma_y() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}

pub fn sigma_z() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

pub fn sigma_0() -> Mat2 {
    Mat2::IDENTITY
}

/// `[σx, σy, σz, σ0]`.
pub fn pauli_basis() -> [Mat2; 4] {
    [sigma_x(), sigma_y(), sigma_z(), sigma_0()]
}

/// `v·σ = vx σx + vy σy + vz σz`.
pub fn vec_to_pauli(v: Vec3) -> Mat2 {
    Mat2::new(
        Complex64::new(v.z, 0.0),
        Complex64::new(v.x, -v.y),
        Complex64::new(v.x, v.y),
        Complex64::new(-v.z, 0.0),
    )
}

/// Components `½ Re tr(σk M)` without validation. Exact inverse of
/// [`vec_to_pauli`] on Hermitian traceless input.
pub(crate) fn pauli_components(m: &Mat2) -> Vec3 {
    let a = &m.a;
    Vec3::new(
        0.5 * (a[0][1].re + a[1][0].re),
        0.5 * (a[1][0].im - a[0][1].im),
        0.5 * (a[0][0].re - a[1][1].re),
    )
}

/// Inverse of [`vec_to_pauli`]: `vk = ½ tr(σk M)`.
///
/// Fails unless `M` is Hermitian and traceless within
/// [`tolerances::REPRESENTATION`].
pub fn pauli_to_vec(m: &Mat2) -> Result<Vec3> {
    let herm = m.hermiticity_defect();
    if !(herm <= tolerances::REPRESENTATION) {
        return Err(Error::Representation(format!(
            "matrix is not Hermitian (defect {herm:e})"
        )));
    }
    let tr = m.trace().norm();
    if !(tr <= tolerances::REPRESENTATION) {
        return Err(Error::Representation(format!(
            "matrix is not traceless (|trace| = {tr:e})"
        )));
    }
    Ok(pauli_components(m))
}

/// `AB − BA`
pub fn commutator(a: &Mat2, b: &Mat2) -> Mat2 {
    *a * *b - *b * *a
}

/// Max entry-wise modulus of `(a·σ)(b·σ) − [(a·b)σ0 + i(a×b)·σ]`.
pub fn pauli_identity_residual(a: Vec3, b: Vec3) -> f64 {
    let lhs = vec_to_pauli(a) * vec_to_pauli(b);
    let rhs = a.dot(b) * sigma_0() + I * vec_to_pauli(a.cross(b));
    lhs.max_abs_diff(&rhs)
}
