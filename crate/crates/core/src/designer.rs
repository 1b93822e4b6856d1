//! Commensurate-frequency rotation protocols.
//!
//! A rotation at constant velocity `theta_dot` over `T = theta_f / theta_dot`
//! returns every rotating-frame state to itself when `W2 / W1 = n2 / n1` and
//! `T = 2 pi n1 / W1`. Fixing `omega1`, both conditions pin `theta_dot` and
//! `omega2` through the ratios `kappa_minus = omega1 / theta_dot` and
//! `kappa_plus = omega2 / theta_dot`.

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::model::TrapConfig;
use crate::scalar::Real;
use crate::symplectic::{frequency_ratio, normal_modes};

/// A complete constant-velocity rotation design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationProtocol<T> {
    pub n1: u32,
    pub n2: u32,
    pub theta_f: T,
    pub omega1: T,
    pub kappa_minus: T,
    pub kappa_plus: T,
    pub theta_dot: T,
    pub omega2: T,
    pub duration: T,
}

impl<T: Real> RotationProtocol<T> {
    /// Trap configuration realising the protocol.
    pub fn config(&self) -> TrapConfig<T> {
        TrapConfig::new(self.omega1, self.omega2, self.theta_dot, self.theta_f)
            .expect("designed protocols are valid configurations")
    }

    /// `gcd(n1, n2)`; above one the reduced pair revives after a fraction of `duration`.
    pub fn common_factor(&self) -> u32 {
        self.n1.gcd(&self.n2)
    }

    /// Human readable note when `(n1, n2)` is not in lowest terms.
    pub fn reduction_warning(&self) -> Option<String> {
        let g = self.common_factor();
        (g > 1).then(|| {
            format!(
                "(n1, n2) = ({}, {}) shares the factor {g}; the states already revive at T/{g}, \
                 and the reduced pair ({}, {}) gives a shorter valid design",
                self.n1,
                self.n2,
                self.n1 / g,
                self.n2 / g
            )
        })
    }
}

fn check_integers(n1: u32, n2: u32) -> Result<()> {
    if n1 == 0 || n1 >= n2 {
        return Err(Error::InfeasibleDesign(format!(
            "integers must satisfy 0 < n1 < n2 (got n1 = {n1}, n2 = {n2})"
        )));
    }
    Ok(())
}

/// The ratios `(kappa_minus, kappa_plus)` for a target angle and integer pair.
pub fn kappa<T: Real>(n1: u32, n2: u32, theta_f: T) -> Result<(T, T)> {
    check_integers(n1, n2)?;
    if !(theta_f > T::zero()) {
        return Err(Error::InfeasibleDesign(format!(
            "target angle must be positive (got {theta_f})"
        )));
    }
    let pi = T::pi();
    let (a, b) = (T::from_int(n1 as usize), T::from_int(n2 as usize));
    let d_plus = a * a + b * b;
    let d_minus = a * a - b * b;
    let pi2 = pi * pi;
    let tf2 = theta_f * theta_f;
    let two = T::lit(2.0);

    let radicand = pi2 * pi2 * d_minus * d_minus - two * pi2 * d_plus * tf2 + tf2 * tf2;
    if radicand < T::zero() {
        return Err(Error::InfeasibleDesign(format!(
            "no commensurate design for theta_f = {theta_f} with (n1, n2) = ({n1}, {n2}); \
             angles between pi (n2 - n1) and pi (n2 + n1) are unreachable"
        )));
    }
    let base = -T::one() + two * pi2 * d_plus / tf2;
    let spread = two * radicand.sqrt() / tf2;
    let km2 = base - spread;
    let kp2 = base + spread;
    if km2 <= T::one() {
        return Err(Error::InfeasibleDesign(format!(
            "kappa_minus^2 = {km2} does not exceed 1, so the rotation would be too fast for the trap"
        )));
    }
    Ok((km2.sqrt(), kp2.sqrt()))
}

/// Designs the rotation for a given slow-axis frequency.
pub fn design_protocol<T: Real>(
    omega1: T,
    theta_f: T,
    n1: u32,
    n2: u32,
) -> Result<RotationProtocol<T>> {
    if !(omega1 > T::zero()) {
        return Err(Error::InvalidConfig(format!(
            "omega1 must be positive (got {omega1})"
        )));
    }
    let (kappa_minus, kappa_plus) = kappa(n1, n2, theta_f)?;
    let theta_dot = omega1 / kappa_minus;
    let omega2 = kappa_plus * theta_dot;
    Ok(RotationProtocol {
        n1,
        n2,
        theta_f,
        omega1,
        kappa_minus,
        kappa_plus,
        theta_dot,
        omega2,
        duration: kappa_minus * theta_f / omega1,
    })
}

/// `sqrt(theta_f^2 + 4 pi^2) / omega1`: one slow-mode oscillation with an
/// infinitely narrow trap.
pub fn minimal_time<T: Real>(omega1: T, theta_f: T) -> T {
    (theta_f * theta_f + T::lit(4.0) * T::pi() * T::pi()).sqrt() / omega1
}

/// Rotation velocity making a fixed trap commensurate, with the discrete
/// angle it produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommensurateVelocity<T> {
    pub theta_dot: T,
    pub theta_f: T,
    pub duration: T,
}

pub fn commensurate_velocity<T: Real>(
    omega1: T,
    omega2: T,
    n1: u32,
    n2: u32,
) -> Result<CommensurateVelocity<T>> {
    check_integers(n1, n2)?;
    // Angle is irrelevant for the ratio; normalization orders the axes.
    let trap = TrapConfig::new(omega1, omega2, T::zero(), T::one())?;
    let (w1, w2) = (trap.omega1(), trap.omega2());
    let target = T::from_int(n2 as usize) / T::from_int(n1 as usize);
    let static_ratio = w2 / w1;
    let degenerate_tol = T::tol(1e-12) * target;
    if (target - static_ratio).abs() <= degenerate_tol {
        return Err(Error::DegenerateDesign(format!(
            "n2/n1 = {target} equals w2/w1; the only solution is theta_dot = 0 (no rotation)"
        )));
    }
    if target < static_ratio {
        return Err(Error::InfeasibleDesign(format!(
            "n2/n1 = {target} is below w2/w1 = {static_ratio}; the ratio only grows with rotation"
        )));
    }

    let ratio_gap = |td: T| frequency_ratio(&trap.with_theta_dot(td)) - target;
    let eps = T::lit(1e-9) * w1;
    let mut lo = eps;
    let mut hi = w1 * (T::one() - T::lit(1e-9));
    if ratio_gap(lo) > T::zero() {
        return Err(Error::DegenerateDesign(format!(
            "root lies below theta_dot = {eps}; n2/n1 is numerically indistinguishable from w2/w1"
        )));
    }
    if ratio_gap(hi) < T::zero() {
        return Err(Error::InfeasibleDesign(format!(
            "ratio {target} not reached below the positivity bound"
        )));
    }
    let rel = T::tol(1e-12);
    for _ in 0..400 {
        let mid = (lo + hi) * T::lit(0.5);
        if ratio_gap(mid) > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= rel * hi {
            break;
        }
    }
    let theta_dot = (lo + hi) * T::lit(0.5);
    let modes = normal_modes(&trap.with_theta_dot(theta_dot))?;
    let duration = T::two_pi() * T::from_int(n1 as usize) / modes.omega_cap1;
    Ok(CommensurateVelocity {
        theta_dot,
        theta_f: theta_dot * duration,
        duration,
    })
}

/// Energy variance of the initial state, the quadratic decay rate of the
/// survival probability under a timing error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityReport<T> {
    pub delta_h_sq: T,
    pub fitted_rate: Option<T>,
    pub relative_error: Option<T>,
}

impl<T: Real> SensitivityReport<T> {
    /// Attaches a numerically fitted rate.
    pub fn with_fit(self, fitted: T) -> Self {
        let relative_error = if self.delta_h_sq == T::zero() {
            fitted.abs()
        } else {
            ((fitted - self.delta_h_sq) / self.delta_h_sq).abs()
        };
        Self {
            fitted_rate: Some(fitted),
            relative_error: Some(relative_error),
            ..self
        }
    }
}

/// `theta_dot^2 (w1 - w2)^2 / (4 w1 w2)` for the ground state of the static trap.
pub fn ground_state_sensitivity<T: Real>(protocol: &RotationProtocol<T>) -> SensitivityReport<T> {
    ground_state_variance(protocol.omega1, protocol.omega2, protocol.theta_dot)
}

pub fn ground_state_variance<T: Real>(omega1: T, omega2: T, theta_dot: T) -> SensitivityReport<T> {
    let d = omega1 - omega2;
    SensitivityReport {
        delta_h_sq: theta_dot * theta_dot * d * d / (T::lit(4.0) * omega1 * omega2),
        fitted_rate: None,
        relative_error: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const KHZ: f64 = 2.0 * PI * 1e3;

    fn round(x: f64, digits: i32) -> f64 {
        let f = 10f64.powi(digits);
        (x * f).round() / f
    }

    #[test]
    fn kappa_for_one_two_quarter_turn() {
        let (km, kp) = kappa(1, 2, PI / 2.0).unwrap();
        // Independent re-evaluation: kappa^2 = 39 -+ 8 sqrt(6.5625).
        let root = 6.5625f64.sqrt();
        assert!((km - (39.0 - 8.0 * root).sqrt()).abs() < 1e-12);
        assert!((kp - (39.0 + 8.0 * root).sqrt()).abs() < 1e-12);
        assert!((km - 4.3019).abs() < 5e-5);
        assert!((kp - 7.7132).abs() < 5e-5);
        assert!((kp / km - 1.7930).abs() < 5e-5);
        assert!((1.0 / km - 0.23246).abs() < 5e-6);
    }

    #[test]
    fn unreachable_angle_is_infeasible() {
        assert!(matches!(kappa(1, 2, 2.0 * PI), Err(Error::InfeasibleDesign(_))));
        assert!(matches!(kappa(2, 1, 1.0), Err(Error::InfeasibleDesign(_))));
        assert!(matches!(kappa(0, 1, 1.0), Err(Error::InfeasibleDesign(_))));
        assert!(kappa(1, 2, -1.0).is_err());
    }

    #[test]
    fn larger_n1_is_slower() {
        let (a, b) = kappa(1, 2, PI / 2.0).unwrap();
        let (c, d) = kappa(2, 4, PI / 2.0).unwrap();
        assert!(c > a && d > b);
    }

    #[test]
    fn table_rows() {
        let rows = [
            (1.0, 1.79, 0.23, 1.08),
            (2.0, 3.59, 0.46, 0.54),
            (5.0, 8.96, 1.16, 0.22),
            (10.0, 17.93, 2.32, 0.11),
        ];
        for (f1, f2, rot, t_ms) in rows {
            let p = design_protocol(f1 * KHZ, PI / 2.0, 1, 2).unwrap();
            assert_eq!(round(p.omega2 / KHZ, 2), f2);
            assert_eq!(round(p.theta_dot / KHZ, 2), rot);
            assert_eq!(round(p.duration * 1e3, 2), t_ms);
        }
        let r1 = design_protocol(KHZ, PI / 2.0, 1, 2).unwrap();
        let r2 = design_protocol(2.0 * KHZ, PI / 2.0, 1, 2).unwrap();
        assert!((r2.duration * 2.0 - r1.duration).abs() < 1e-15);
    }

    #[test]
    fn minimal_time_examples() {
        let t = minimal_time(KHZ, PI / 2.0);
        assert!((t * 1e3 - 1.0308).abs() < 5e-5);
        let t0 = minimal_time(1.0, 1e-12);
        assert!((t0 - 2.0 * PI).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for n2 in [2, 5, 10, 50] {
            let p = design_protocol(KHZ, PI / 2.0, 1, n2).unwrap();
            assert!(p.duration < prev && p.duration > t);
            prev = p.duration;
        }
    }

    #[test]
    fn commensurate_velocity_examples() {
        // Table I row 1 operating point from the fixed trap.
        let p = design_protocol(1.0, PI / 2.0, 1, 2).unwrap();
        let c = commensurate_velocity(1.0, p.omega2, 1, 2).unwrap();
        assert!((c.theta_dot - p.theta_dot).abs() < 1e-11);
        assert!((c.theta_f - PI / 2.0).abs() < 1e-9);
        let approx = commensurate_velocity(1.0, 1.7929, 1, 2).unwrap();
        assert!((approx.theta_dot - 0.23246f64).abs() < 5e-5);

        assert!(matches!(
            commensurate_velocity(1.0, 2.5, 1, 2),
            Err(Error::InfeasibleDesign(_))
        ));
        assert!(matches!(
            commensurate_velocity(1.0, 1.5, 2, 3),
            Err(Error::DegenerateDesign(_))
        ));
    }

    #[test]
    fn sensitivity_examples() {
        let iso = ground_state_variance(1.0, 1.0, 0.3);
        assert_eq!(iso.delta_h_sq, 0.0);
        let p = design_protocol(1.0, PI / 2.0, 1, 2).unwrap();
        let s = ground_state_sensitivity(&p);
        assert!((s.delta_h_sq - 4.738e-3).abs() < 5e-7);
        let mut prev = 0.0;
        for n2 in [2, 3, 5, 10, 20] {
            let s = ground_state_sensitivity(&design_protocol(1.0, PI / 2.0, 1, n2).unwrap());
            assert!(s.delta_h_sq > prev);
            prev = s.delta_h_sq;
        }
        let fitted = s.with_fit(s.delta_h_sq * 1.005);
        assert!((fitted.relative_error.unwrap() - 0.005).abs() < 1e-12);
    }

    #[test]
    fn reduction_warning_for_common_factor() {
        let p = design_protocol(1.0, PI / 2.0, 2, 4).unwrap();
        assert_eq!(p.common_factor(), 2);
        assert!(p.reduction_warning().is_some());
        assert!(design_protocol(1.0, PI / 2.0, 1, 2).unwrap().reduction_warning().is_none());
    }
}
