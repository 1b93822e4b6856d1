//! Global phase acquired over one revival period.
//!
//! Every level `W1 (j + 1/2) + W2 (j' + 1/2)` advances by
//! `2 pi (n1 j + n2 j') + pi (n1 + n2)` over `T`, so the whole state returns
//! multiplied by `(-1)^(n1 + n2)`. That factor is exactly the zero-point phase
//! `exp(-i (W1 + W2) T / 2)`; once it is divided out the remaining
//! dynamical phase is `+1`.

use nalgebra::ComplexField;
use num_complex::Complex;

use super::fock::build_fock_hamiltonian;
use super::propagate::evolve;
use super::state::QuantumState;
use crate::designer::RotationProtocol;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::symplectic::normal_modes;

/// Overlaps below this magnitude do not define a phase.
pub const MIN_REVIVAL_OVERLAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevivalPhase<T> {
    /// `<psi0|psi(T)> / |<psi0|psi(T)>|`.
    pub full: Complex<T>,
    /// `exp(-i (W1 + W2) T / 2)`.
    pub zero_point: Complex<T>,
    /// `full / zero_point`.
    pub dynamical: Complex<T>,
    /// `|<psi0|psi(T)>|`.
    pub overlap: T,
    /// `(-1)^(n1 + n2)` for the protocol integers.
    pub expected_sign: T,
}

impl<T: Real> RevivalPhase<T> {
    /// Distance of the full phase from `(-1)^(n1 + n2)`.
    pub fn full_phase_error(&self) -> T {
        (self.full - Complex::new(self.expected_sign, T::zero())).modulus()
    }

    /// Distance of the dynamical phase from `+1`.
    pub fn dynamical_phase_error(&self) -> T {
        (self.dynamical - Complex::new(T::one(), T::zero())).modulus()
    }
}

pub fn revival_phase<T: Real>(
    psi0: &QuantumState<T>,
    protocol: &RotationProtocol<T>,
    nmax: usize,
) -> Result<RevivalPhase<T>> {
    let psi0 = psi0.resized(nmax)?;
    let config = protocol.config();
    let modes = normal_modes(&config)?;
    let h = build_fock_hamiltonian(&config, nmax)?;
    let t = protocol.duration;
    let psit = evolve(&psi0, &h, t)?;
    let ov = psi0.inner(&psit)?;
    let mag = ov.modulus();
    if mag.as_f64() < MIN_REVIVAL_OVERLAP {
        return Err(Error::DegenerateOverlap(mag.as_f64()));
    }
    let full = ov / mag;
    let zp_angle = -(modes.omega_cap1 + modes.omega_cap2) * t * T::lit(0.5);
    let zero_point = Complex::new(zp_angle.cos(), zp_angle.sin());
    let expected_sign = if (protocol.n1 + protocol.n2).is_multiple_of(2) {
        T::one()
    } else {
        -T::one()
    };
    Ok(RevivalPhase {
        full,
        zero_point,
        dynamical: full * zero_point.conj(),
        overlap: mag,
        expected_sign,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designer::design_protocol;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn odd_protocol_flips_sign() {
        let p = design_protocol(1.0, FRAC_PI_2, 1, 2).unwrap();
        let r = revival_phase(&QuantumState::ground(24).unwrap(), &p, 24).unwrap();
        assert!(r.full_phase_error() < 1e-4);
        assert!((r.full - r.zero_point).norm() < 1e-8);
        assert!(r.dynamical_phase_error() < 1e-4);
        assert_eq!(r.expected_sign, -1.0);
    }

    #[test]
    fn even_protocol_keeps_sign() {
        let p = design_protocol(1.0, FRAC_PI_2, 1, 3).unwrap();
        let r = revival_phase(&QuantumState::entangled(24).unwrap(), &p, 24).unwrap();
        assert_eq!(r.expected_sign, 1.0);
        assert!(r.full_phase_error() < 1e-4);
        assert!(r.dynamical_phase_error() < 1e-4);
    }

    #[test]
    fn vanishing_overlap_is_rejected() {
        // Static trap held for half a period of mode 1: (|0,0> + |1,0>)/sqrt(2)
        // returns orthogonal to itself.
        let mut p = design_protocol(1.0, FRAC_PI_2, 1, 2).unwrap();
        p.theta_dot = 0.0;
        p.omega2 = 2.0;
        p.duration = std::f64::consts::PI;
        let mut c = nalgebra::DVector::from_element(16, Complex::new(0.0, 0.0));
        c[0] = Complex::new(1.0, 0.0);
        c[4] = Complex::new(1.0, 0.0);
        let psi = QuantumState::from_amplitudes(4, c).unwrap();
        assert!(matches!(revival_phase(&psi, &p, 4), Err(Error::DegenerateOverlap(_))));
    }
}
