//! Fubini–Study geometry of `P^n(C)` and `P^n(H)`: geodesic distance from
//! homogeneous coordinates, the radial volume density about a point, and a
//! finite-difference radial Laplacian.
//!
//! Distances are normalized so the diameter is `π/2`. In geodesic polar
//! coordinates the density is `ω sin(r)^{2kn-1} cos(r)^{2k-1}` and the radial
//! Laplacian is `f'' + ((2kn-1) cot r - (2k-1) tan r) f'`.

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fd;
use crate::kernels::stationary_value;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };
    pub const I: Quaternion = Quaternion {
        w: 0.0,
        x: 1.0,
        y: 0.0,
        z: 0.0,
    };
    pub const J: Quaternion = Quaternion {
        w: 0.0,
        x: 0.0,
        y: 1.0,
        z: 0.0,
    };
    pub const K: Quaternion = Quaternion {
        w: 0.0,
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    /// `a + b j` for complex `a, b`, the identification `H = C + C j`.
    pub fn from_complex_pair(a: Complex64, b: Complex64) -> Self {
        // (a_re + a_im i) + (b_re + b_im i) j = a_re + a_im i + b_re j + b_im k
        Quaternion::new(a.re, a.im, b.re, b.im)
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

/// Scalars of a (possibly non-commutative) field acting on coordinates from the right.
pub trait FieldScalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn zero() -> Self;
    fn conj(self) -> Self;
    fn norm_sqr(self) -> f64;
    fn scale(self, s: f64) -> Self;
}

impl FieldScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl FieldScalar for Quaternion {
    fn zero() -> Self {
        Quaternion::default()
    }
    fn conj(self) -> Self {
        Quaternion::conj(self)
    }
    fn norm_sqr(self) -> f64 {
        Quaternion::norm_sqr(self)
    }
    fn scale(self, s: f64) -> Self {
        Quaternion::scale(self, s)
    }
}

/// `C` (`k = 1`) or `H` (`k = 2`); `2k` is the real dimension of the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Complex,
    Quaternionic,
}

impl Field {
    pub fn k(self) -> usize {
        match self {
            Field::Complex => 1,
            Field::Quaternionic => 2,
        }
    }

    pub fn from_k(k: usize) -> Result<Self> {
        match k {
            1 => Ok(Field::Complex),
            2 => Ok(Field::Quaternionic),
            _ => Err(Error::domain(format!(
                "field index k must be 1 or 2, got {k}"
            ))),
        }
    }
}

/// `P^n(F)` with `F = C` or `H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpaceDescriptor {
    n: usize,
    field: Field,
}

impl SpaceDescriptor {
    pub fn new(n: usize, field: Field) -> Result<Self> {
        if n < 1 {
            return Err(Error::domain("projective index n must be at least 1"));
        }
        Ok(SpaceDescriptor { n, field })
    }

    pub fn cpn(n: usize) -> Result<Self> {
        Self::new(n, Field::Complex)
    }

    pub fn hpn(n: usize) -> Result<Self> {
        Self::new(n, Field::Quaternionic)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.field.k()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn real_dimension(&self) -> usize {
        2 * self.k() * self.n
    }

    /// `-4l(l + kn + k - 1)`, the eigenvalue of `P_l^{(kn-1,k-1)}(cos 2r)`.
    pub fn eigenvalue(&self, l: usize) -> f64 {
        let (k, n, l) = (self.k() as f64, self.n as f64, l as f64);
        -4.0 * l * (l + k * n + k - 1.0)
    }
}

/// A point of `P^m(F)` given by homogeneous coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum HomogeneousPoint {
    Complex(Vec<Complex64>),
    Quaternionic(Vec<Quaternion>),
}

impl HomogeneousPoint {
    pub fn complex(coords: Vec<Complex64>) -> Result<Self> {
        if coords.iter().all(|c| c.norm_sqr() == 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(HomogeneousPoint::Complex(coords))
    }

    pub fn quaternionic(coords: Vec<Quaternion>) -> Result<Self> {
        if coords.iter().all(|c| c.norm_sqr() == 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(HomogeneousPoint::Quaternionic(coords))
    }

    pub fn field(&self) -> Field {
        match self {
            HomogeneousPoint::Complex(_) => Field::Complex,
            HomogeneousPoint::Quaternionic(_) => Field::Quaternionic,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            HomogeneousPoint::Complex(c) => c.len(),
            HomogeneousPoint::Quaternionic(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Angle between the lines `x F` and `y F`:
/// `cos d = |Σ conj(x_i) y_i| / (|x| |y|)`.
///
/// Evaluated as `atan2(|y_⊥| |x|, |⟨x,y⟩|)` where `y_⊥` is the part of `y`
/// orthogonal to the line of `x`; this equals the clamped arccos but keeps
/// full relative accuracy for nearby points.
fn line_angle<S: FieldScalar>(x: &[S], y: &[S]) -> f64 {
    let inner = x
        .iter()
        .zip(y)
        .fold(S::zero(), |acc, (a, b)| acc + a.conj() * *b);
    let x_norm_sqr: f64 = x.iter().map(|a| a.norm_sqr()).sum();
    // y_perp = y - x (inner / |x|^2)
    let coeff = inner.scale(1.0 / x_norm_sqr);
    let perp_sqr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (*b - *a * coeff).norm_sqr())
        .sum();
    (perp_sqr.sqrt() * x_norm_sqr.sqrt()).atan2(inner.norm_sqr().sqrt())
}

/// Fubini–Study geodesic distance, in `[0, π/2]`.
pub fn distance(
    space: &SpaceDescriptor,
    x: &HomogeneousPoint,
    y: &HomogeneousPoint,
) -> Result<f64> {
    let expected = space.n() + 1;
    for p in [x, y] {
        if p.field() != space.field() {
            return Err(Error::FieldMismatch);
        }
        if p.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: p.len(),
            });
        }
    }
    // Averaging both orders makes the result exactly symmetric in floating point.
    let d = match (x, y) {
        (HomogeneousPoint::Complex(a), HomogeneousPoint::Complex(b)) => {
            0.5 * (line_angle(a, b) + line_angle(b, a))
        }
        (HomogeneousPoint::Quaternionic(a), HomogeneousPoint::Quaternionic(b)) => {
            0.5 * (line_angle(a, b) + line_angle(b, a))
        }
        _ => unreachable!("fields checked above"),
    };
    Ok(d.clamp(0.0, FRAC_PI_2))
}

/// `∫_0^{π/2} sin^{2kn-1} cos^{2k-1} = B(kn, k) / 2`.
fn density_shape_integral(space: &SpaceDescriptor) -> f64 {
    let (a, b) = (space.k() * space.n(), space.k());
    let factorial = |m: usize| (1..=m).fold(1.0, |acc, j| acc * j as f64);
    0.5 * factorial(a - 1) * factorial(b - 1) / factorial(a + b - 1)
}

/// The constant `ω` in the density, chosen so that `∫ J = 1 / stationary_value`.
pub fn density_constant(space: &SpaceDescriptor) -> f64 {
    1.0 / (stationary_value(space) * density_shape_integral(space))
}

/// `Vol(M)`.
pub fn volume(space: &SpaceDescriptor) -> f64 {
    1.0 / stationary_value(space)
}

/// `J(r) = ω sin(r)^{2kn-1} cos(r)^{2k-1}` for `r ∈ (0, π/2)`.
pub fn volume_density(space: &SpaceDescriptor, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < FRAC_PI_2) {
        return Err(Error::domain(format!("radius {r} outside (0, pi/2)")));
    }
    Ok(volume_density_unchecked(space, r))
}

/// Closed form of `J`, also valid (and zero) at the endpoints.
pub fn volume_density_unchecked(space: &SpaceDescriptor, r: f64) -> f64 {
    let (k, n) = (space.k() as i32, space.n() as i32);
    density_constant(space) * r.sin().powi(2 * k * n - 1) * r.cos().powi(2 * k - 1)
}

fn check_fd_domain(r: f64, h: f64) -> Result<()> {
    if !(h > 0.0 && r > h && r < FRAC_PI_2 - h) {
        return Err(Error::domain(format!(
            "radius {r} must lie in (h, pi/2 - h) for step h={h}"
        )));
    }
    Ok(())
}

/// `f'' + ((2kn-1) cot r - (2k-1) tan r) f'` by central differences.
pub fn radial_laplacian_fd<F: Fn(f64) -> f64>(
    space: &SpaceDescriptor,
    f: F,
    r: f64,
    h: f64,
) -> Result<f64> {
    check_fd_domain(r, h)?;
    let (k, n) = (space.k() as f64, space.n() as f64);
    let drift = (2.0 * k * n - 1.0) / r.tan() - (2.0 * k - 1.0) * r.tan();
    Ok(fd::second_derivative(&f, r, h) + drift * fd::derivative(&f, r, h))
}

/// `J^{-1} (J f')'` with both derivatives taken numerically.
pub fn radial_laplacian_divergence_fd<F: Fn(f64) -> f64>(
    space: &SpaceDescriptor,
    f: F,
    r: f64,
    h: f64,
) -> Result<f64> {
    check_fd_domain(r, h)?;
    let flux = |s: f64| volume_density_unchecked(space, s) * fd::derivative(&f, s, h / 4.0);
    Ok(fd::derivative(&flux, r, h) / volume_density_unchecked(space, r))
}
