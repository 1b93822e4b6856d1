//! Rotating-frame problem statement: trap parameters, the quadratic form of
//! the Hamiltonian and phase-space vectors.
//!
//! Coordinates are dimensionless, `q_j = sqrt(m w_j / hbar) q~_j` and
//! `p_j = p~_j / sqrt(m hbar w_j)`, which turns the rotating-frame
//! Hamiltonian into
//!
//! ```text
//! H = w1/2 (p1^2 + q1^2) + w2/2 (p2^2 + q2^2) - theta_dot (q1 p2 / eta - eta q2 p1)
//! ```
//!
//! with `eta = sqrt(w1 / w2)`. Frequencies carry whatever angular unit the
//! caller picks; times are then in the reciprocal unit.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Angular frequency in rad per unit time from an ordinary frequency.
pub fn angular_from_hz<T: Real>(hz: T) -> T {
    T::two_pi() * hz
}

/// Ordinary frequency from an angular frequency.
pub fn hz_from_angular<T: Real>(omega: T) -> T {
    omega / T::two_pi()
}

/// The symplectic metric for the ordering `(q1, q2, p1, p2)`.
pub fn symplectic_metric<T: Real>() -> Matrix4<T> {
    let (o, z) = (T::one(), T::zero());
    #[rustfmt::skip]
    let j = Matrix4::new(
         z,  z, o, z,
         z,  z, z, o,
        -o,  z, z, z,
         z, -o, z, z,
    );
    j
}

/// Trap frequencies, rotation velocity and target angle.
///
/// The constructor normalizes to `omega1 <= omega2`. When the caller passes
/// the axes the other way round they are relabelled by a quarter turn,
/// `(q1, q2) -> (q2, -q1)`, which keeps the sense of rotation (a plain swap
/// is a reflection and would flip the sign of the angular momentum term).
/// [`TrapConfig::axes_swapped`] records this so reports can undo it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapConfig<T> {
    omega1: T,
    omega2: T,
    theta_dot: T,
    theta_f: T,
    axes_swapped: bool,
}

impl<T: Real> TrapConfig<T> {
    pub fn new(omega1: T, omega2: T, theta_dot: T, theta_f: T) -> Result<Self> {
        let finite = |x: T| x.as_f64().is_finite();
        if !(finite(omega1) && finite(omega2) && finite(theta_dot) && finite(theta_f)) {
            return Err(Error::InvalidConfig("all parameters must be finite".into()));
        }
        if omega1 <= T::zero() || omega2 <= T::zero() {
            return Err(Error::InvalidConfig(format!(
                "trap frequencies must be positive (got {omega1}, {omega2})"
            )));
        }
        if theta_f <= T::zero() {
            return Err(Error::InvalidConfig(format!(
                "target angle must be positive (got {theta_f})"
            )));
        }
        let axes_swapped = omega1 > omega2;
        let (omega1, omega2) = if axes_swapped {
            (omega2, omega1)
        } else {
            (omega1, omega2)
        };
        Ok(Self {
            omega1,
            omega2,
            theta_dot,
            theta_f,
            axes_swapped,
        })
    }

    /// Builds a configuration from ordinary frequencies (Hz, kHz, ...).
    pub fn from_hz(f1: T, f2: T, rotation: T, theta_f: T) -> Result<Self> {
        Self::new(
            angular_from_hz(f1),
            angular_from_hz(f2),
            angular_from_hz(rotation),
            theta_f,
        )
    }

    pub fn omega1(&self) -> T {
        self.omega1
    }

    pub fn omega2(&self) -> T {
        self.omega2
    }

    pub fn theta_dot(&self) -> T {
        self.theta_dot
    }

    pub fn theta_f(&self) -> T {
        self.theta_f
    }

    pub fn axes_swapped(&self) -> bool {
        self.axes_swapped
    }

    /// `sqrt(omega1 / omega2)`, in `(0, 1]` after normalization.
    pub fn eta(&self) -> T {
        (self.omega1 / self.omega2).sqrt()
    }

    /// Same trap with a different rotation velocity.
    pub fn with_theta_dot(&self, theta_dot: T) -> Self {
        Self { theta_dot, ..*self }
    }

    /// Duration `theta_f / theta_dot` of a constant-velocity rotation.
    pub fn rotation_time(&self) -> Option<T> {
        if self.theta_dot == T::zero() {
            None
        } else {
            Some(self.theta_f / self.theta_dot.abs())
        }
    }

    /// Maps a state written in the caller's axis labels into the normalized ones.
    pub fn to_normalized_axes(&self, s: PhaseSpaceState<T>) -> PhaseSpaceState<T> {
        if self.axes_swapped {
            PhaseSpaceState::new(s.q2, -s.q1, s.p2, -s.p1)
        } else {
            s
        }
    }

    /// Inverse of [`TrapConfig::to_normalized_axes`].
    pub fn to_input_axes(&self, s: PhaseSpaceState<T>) -> PhaseSpaceState<T> {
        if self.axes_swapped {
            PhaseSpaceState::new(-s.q2, s.q1, -s.p2, s.p1)
        } else {
            s
        }
    }
}

/// Whether the quadratic form is positive definite, i.e. `|theta_dot| < min(w1, w2)`.
pub fn williamson_valid<T: Real>(config: &TrapConfig<T>) -> bool {
    config.theta_dot.abs() < config.omega1.min(config.omega2)
}

pub(crate) fn require_williamson<T: Real>(config: &TrapConfig<T>) -> Result<()> {
    if williamson_valid(config) {
        Ok(())
    } else {
        Err(Error::WilliamsonViolation {
            theta_dot: config.theta_dot.as_f64(),
            bound: config.omega1.as_f64(),
        })
    }
}

/// Symmetric matrix `A` with `H = v^T A v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticForm<T: Real> {
    a: Matrix4<T>,
}

impl<T: Real> QuadraticForm<T> {
    /// Wraps a matrix, keeping only its symmetric part.
    pub fn from_matrix(m: Matrix4<T>) -> Self {
        Self {
            a: (m + m.transpose()) * T::lit(0.5),
        }
    }

    pub fn matrix(&self) -> &Matrix4<T> {
        &self.a
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.a.amax()
    }
}

pub fn build_rotating_hamiltonian<T: Real>(config: &TrapConfig<T>) -> QuadraticForm<T> {
    let half = T::lit(0.5);
    let (w1, w2, td, eta) = (
        config.omega1,
        config.omega2,
        config.theta_dot,
        config.eta(),
    );
    let z = T::zero();
    let c14 = -td / eta;
    let c23 = eta * td;
    #[rustfmt::skip]
    let a = Matrix4::new(
        w1,  z,   z,   c14,
        z,   w2,  c23, z,
        z,   c23, w1,  z,
        c14, z,   z,   w2,
    ) * half;
    QuadraticForm { a }
}

pub fn hamiltonian_value<T: Real>(form: &QuadraticForm<T>, state: &PhaseSpaceState<T>) -> T {
    let v = state.to_vector();
    v.dot(&(form.a * v))
}

/// A point `(q1, q2, p1, p2)` of phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseSpaceState<T> {
    pub q1: T,
    pub q2: T,
    pub p1: T,
    pub p2: T,
}

impl<T: Real> PhaseSpaceState<T> {
    pub fn new(q1: T, q2: T, p1: T, p2: T) -> Self {
        Self { q1, q2, p1, p2 }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn to_vector(&self) -> Vector4<T> {
        Vector4::new(self.q1, self.q2, self.p1, self.p2)
    }

    pub fn from_vector(v: &Vector4<T>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn norm(&self) -> T {
        self.to_vector().norm()
    }

    pub fn is_finite(&self) -> bool {
        [self.q1, self.q2, self.p1, self.p2]
            .iter()
            .all(|x| x.as_f64().is_finite())
    }
}

impl<T: Real> From<Vector4<T>> for PhaseSpaceState<T> {
    fn from(v: Vector4<T>) -> Self {
        Self::from_vector(&v)
    }
}

impl<T: Real> Add for PhaseSpaceState<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.q1 + o.q1, self.q2 + o.q2, self.p1 + o.p1, self.p2 + o.p2)
    }
}

impl<T: Real> Sub for PhaseSpaceState<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.q1 - o.q1, self.q2 - o.q2, self.p1 - o.p1, self.p2 - o.p2)
    }
}

impl<T: Real> Neg for PhaseSpaceState<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.q1, -self.q2, -self.p1, -self.p2)
    }
}

impl<T: Real> Mul<T> for PhaseSpaceState<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        Self::new(self.q1 * k, self.q2 * k, self.p1 * k, self.p2 * k)
    }
}
