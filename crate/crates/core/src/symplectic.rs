//! Symplectic diagonalization of the rotating-frame quadratic form.
//!
//! Four canonical transformations bring `A` to `diag(W1^2, W2^2, 1, 1) / 2`:
//! a quarter turn in the `(q1, p1)` plane that block-diagonalizes `A`, a shear
//! that diagonalizes the momentum block, a squeeze that turns it into the
//! identity, and a rotation by `alpha` acting identically on both blocks.

use nalgebra::{Complex, Matrix4};

use crate::error::{Error, Result};
use crate::model::{
    build_rotating_hamiltonian, require_williamson, symplectic_metric, PhaseSpaceState,
    QuadraticForm, TrapConfig,
};
use crate::scalar::Real;

const SYMPLECTIC_TOL: f64 = 1e-12;
const GENERATOR_TOL: f64 = 1e-10;

/// A 4x4 real matrix with `S^T J S = J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticTransform<T: Real> {
    s: Matrix4<T>,
}

impl<T: Real> SymplecticTransform<T> {
    /// Checks symplecticity; the tolerance is relative to `max(1, |S|_max^2)`.
    pub fn new(s: Matrix4<T>) -> Result<Self> {
        let defect = symplectic_defect(&s);
        let scale = T::one().max(s.amax() * s.amax());
        if defect > T::tol(SYMPLECTIC_TOL) * scale || !defect.as_f64().is_finite() {
            return Err(Error::InvalidConfig(format!(
                "matrix is not symplectic (|S^T J S - J|_max = {defect:e})"
            )));
        }
        Ok(Self { s })
    }

    pub fn identity() -> Self {
        Self {
            s: Matrix4::identity(),
        }
    }

    pub fn matrix(&self) -> &Matrix4<T> {
        &self.s
    }

    /// `S^{-1} = J^{-1} S^T J`.
    pub fn inverse(&self) -> Self {
        let j = symplectic_metric::<T>();
        Self {
            s: -j * self.s.transpose() * j,
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self { s: self.s * other.s }
    }

    pub fn apply(&self, v: &PhaseSpaceState<T>) -> PhaseSpaceState<T> {
        PhaseSpaceState::from_vector(&(self.s * v.to_vector()))
    }

    pub fn defect(&self) -> T {
        symplectic_defect(&self.s)
    }
}

/// `|S^T J S - J|_max`.
pub fn symplectic_defect<T: Real>(s: &Matrix4<T>) -> T {
    let j = symplectic_metric::<T>();
    (s.transpose() * j * s - j).amax()
}

/// The four factors `S0 .. S3` of the diagonalizing transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepTransforms<T: Real> {
    pub s0: SymplecticTransform<T>,
    pub s1: SymplecticTransform<T>,
    pub s2: SymplecticTransform<T>,
    pub s3: SymplecticTransform<T>,
    pub alpha: T,
}

impl<T: Real> StepTransforms<T> {
    pub fn composite(&self) -> SymplecticTransform<T> {
        self.s0.compose(&self.s1).compose(&self.s2).compose(&self.s3)
    }

    pub fn as_array(&self) -> [SymplecticTransform<T>; 4] {
        [self.s0, self.s1, self.s2, self.s3]
    }
}

fn quarter_turn<T: Real>() -> Matrix4<T> {
    let (o, z) = (T::one(), T::zero());
    #[rustfmt::skip]
    let m = Matrix4::new(
        z, z, -o, z,
        z, o,  z, z,
        o, z,  z, z,
        z, z,  z, o,
    );
    m
}

fn shear<T: Real>(config: &TrapConfig<T>) -> Matrix4<T> {
    let c = config.theta_dot() / (config.omega1() * config.omega2()).sqrt();
    let mut m = Matrix4::identity();
    m[(0, 1)] = c;
    m[(3, 2)] = -c;
    m
}

fn squeeze<T: Real>(config: &TrapConfig<T>) -> Matrix4<T> {
    let w1 = config.omega1();
    let w2 = config.omega2();
    let delta = w1 * w1 - config.theta_dot() * config.theta_dot();
    let a = (delta / w1).sqrt();
    let b = w2.sqrt();
    Matrix4::from_diagonal(&nalgebra::Vector4::new(a, b, T::one() / a, T::one() / b))
}

fn block_rotation<T: Real>(alpha: T) -> Matrix4<T> {
    let (s, c) = alpha.sin_cos();
    let z = T::zero();
    #[rustfmt::skip]
    let m = Matrix4::new(
        c, -s, z,  z,
        s,  c, z,  z,
        z,  z, c, -s,
        z,  z, s,  c,
    );
    m
}

/// `tan 2 alpha = 4 theta_dot sqrt(delta) / (w1^2 - w2^2 - 4 theta_dot^2)`.
///
/// The arctangent fixes `2 alpha` only up to a quadrant. A quarter turn of
/// `alpha` exchanges the diagonal entries of the rotated block, so the branch
/// is picked to put `W1^2` first, then folded into `(-pi/2, pi/2]` (adding
/// `pi` only flips the sign of `S3`).
fn rotation_angle<T: Real>(config: &TrapConfig<T>) -> T {
    let (w1, w2, td) = (config.omega1(), config.omega2(), config.theta_dot());
    let delta = w1 * w1 - td * td;
    let four = T::lit(4.0);
    let y = four * td * delta.sqrt();
    let x = w1 * w1 - w2 * w2 - four * td * td;
    if y == T::zero() && x == T::zero() {
        return T::zero();
    }
    let mut alpha = y.atan2(x) * T::lit(0.5);

    // Upper block of 2 A3 and its first diagonal entry after rotation.
    let (a, b, d) = (delta, T::lit(2.0) * td * delta.sqrt(), T::lit(3.0) * td * td + w2 * w2);
    let first = |ang: T| {
        let (s, c) = ang.sin_cos();
        a * c * c + T::lit(2.0) * b * c * s + d * s * s
    };
    let (w1s, w2s) = normal_frequency_squares(config);
    if (first(alpha) - w2s).abs() < (first(alpha) - w1s).abs() {
        alpha += T::frac_pi_2();
    }
    if alpha > T::frac_pi_2() {
        alpha -= T::pi();
    } else if alpha <= -T::frac_pi_2() {
        alpha += T::pi();
    }
    alpha
}

fn steps_with_angle<T: Real>(config: &TrapConfig<T>, alpha: T) -> StepTransforms<T> {
    // The factors are symplectic by construction; skip the runtime check here
    // and let callers and tests verify it.
    StepTransforms {
        s0: SymplecticTransform { s: quarter_turn() },
        s1: SymplecticTransform { s: shear(config) },
        s2: SymplecticTransform { s: squeeze(config) },
        s3: SymplecticTransform {
            s: block_rotation(alpha),
        },
        alpha,
    }
}

/// Squares of the normal frequencies, `(W1^2, W2^2)`.
///
/// `W2^2` uses the closed form with the `+` sign; `W1^2` follows from the
/// product `W1^2 W2^2 = (w1^2 - theta_dot^2)(w2^2 - theta_dot^2)`, which
/// avoids cancellation close to the positivity bound. Defined for any
/// configuration; `W1^2` turns negative beyond the bound.
pub fn normal_frequency_squares<T: Real>(config: &TrapConfig<T>) -> (T, T) {
    let (w1, w2, td) = (config.omega1(), config.omega2(), config.theta_dot());
    let (w1s, w2s, tds) = (w1 * w1, w2 * w2, td * td);
    let half = T::lit(0.5);
    let root = (T::lit(8.0) * tds * (w1s + w2s) + (w1s - w2s) * (w1s - w2s)).sqrt();
    let big = tds + half * (w1s + w2s) + half * root;
    let small = if big > T::zero() {
        (w1s - tds) * (w2s - tds) / big
    } else {
        tds + half * (w1s + w2s) - half * root
    };
    (small, big)
}

/// Ratio `W2 / W1` of the normal frequencies of a valid configuration.
pub fn frequency_ratio<T: Real>(config: &TrapConfig<T>) -> T {
    let (a, b) = normal_frequency_squares(config);
    (b / a).sqrt()
}

pub fn step_transforms<T: Real>(config: &TrapConfig<T>) -> Result<StepTransforms<T>> {
    require_williamson(config)?;
    Ok(steps_with_angle(config, rotation_angle(config)))
}

/// Normal-mode decomposition of a valid configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalModes<T: Real> {
    pub omega_cap1: T,
    pub omega_cap2: T,
    pub alpha: T,
    pub transform: SymplecticTransform<T>,
    pub diag: Matrix4<T>,
    inverse: SymplecticTransform<T>,
    config: TrapConfig<T>,
}

impl<T: Real> NormalModes<T> {
    pub fn config(&self) -> &TrapConfig<T> {
        &self.config
    }

    pub fn inverse_transform(&self) -> &SymplecticTransform<T> {
        &self.inverse
    }

    pub fn steps(&self) -> StepTransforms<T> {
        steps_with_angle(&self.config, self.alpha)
    }

    /// Largest off-diagonal entry of `S^T A S`.
    pub fn offdiag_residual(&self) -> T {
        let mut m = self.diag;
        m.fill_diagonal(T::zero());
        m.amax()
    }
}

pub fn normal_modes<T: Real>(config: &TrapConfig<T>) -> Result<NormalModes<T>> {
    require_williamson(config)?;
    let a = build_rotating_hamiltonian(config);
    let (w1s, w2s) = normal_frequency_squares(config);

    let alpha = rotation_angle(config);
    let s = steps_with_angle(config, alpha).composite();
    let diag = s.s.transpose() * a.matrix() * s.s;

    Ok(NormalModes {
        omega_cap1: w1s.sqrt(),
        omega_cap2: w2s.sqrt(),
        alpha,
        transform: s,
        diag,
        inverse: s.inverse(),
        config: *config,
    })
}

/// `V = S^{-1} v`.
pub fn to_normal_coords<T: Real>(
    state: &PhaseSpaceState<T>,
    modes: &NormalModes<T>,
) -> PhaseSpaceState<T> {
    modes.inverse.apply(state)
}

/// `v = S V`.
pub fn from_normal_coords<T: Real>(
    state: &PhaseSpaceState<T>,
    modes: &NormalModes<T>,
) -> PhaseSpaceState<T> {
    modes.transform.apply(state)
}

/// `(P1^2 + P2^2 + W1^2 Q1^2 + W2^2 Q2^2) / 2`.
pub fn normal_mode_energy<T: Real>(state: &PhaseSpaceState<T>, modes: &NormalModes<T>) -> T {
    let half = T::lit(0.5);
    let (w1, w2) = (modes.omega_cap1, modes.omega_cap2);
    half * (state.p1 * state.p1
        + state.p2 * state.p2
        + w1 * w1 * state.q1 * state.q1
        + w2 * w2 * state.q2 * state.q2)
}

/// Form `S^T A S` for an arbitrary transform.
pub fn transform_form<T: Real>(
    form: &QuadraticForm<T>,
    s: &SymplecticTransform<T>,
) -> QuadraticForm<T> {
    QuadraticForm::from_matrix(s.s.transpose() * form.matrix() * s.s)
}

/// Symmetric generator `G` with `S = exp(2 J G)`, on the principal branch.
pub fn symplectic_generator<T: Real>(transform: &SymplecticTransform<T>) -> Result<Matrix4<T>> {
    let s = transform.s;
    let log = principal_log(&s)?;
    let j = symplectic_metric::<T>();
    // J^{-1} = -J
    let g = -(j * log) * T::lit(0.5);
    let scale = T::one().max(g.amax());
    let asym = (g - g.transpose()).amax();
    if asym > T::tol(GENERATOR_TOL) * scale {
        return Err(Error::LogBranchFailure(format!(
            "generator is not symmetric (asymmetry {asym:e})"
        )));
    }
    let g = (g + g.transpose()) * T::lit(0.5);
    let rebuilt = (j * g * T::lit(2.0)).exp();
    let err = (rebuilt - s).amax();
    if err > T::tol(GENERATOR_TOL) * T::one().max(s.amax()) {
        return Err(Error::LogBranchFailure(format!(
            "exp(2JG) misses S by {err:e}"
        )));
    }
    Ok(g)
}

/// Principal real logarithm by inverse scaling and squaring.
///
/// Fails when an eigenvalue sits on the closed negative real axis, where the
/// principal branch is undefined.
pub fn principal_log<T: Real>(m: &Matrix4<T>) -> Result<Matrix4<T>> {
    let scale = T::one().max(m.amax());
    let eig = m.complex_eigenvalues();
    let cut = T::tol(1e-10) * scale;
    for z in eig.iter() {
        if z.im.abs() <= cut && z.re <= cut {
            return Err(Error::LogBranchFailure(format!(
                "eigenvalue {} {:+}i lies on the branch cut",
                z.re, z.im
            )));
        }
    }

    let id = Matrix4::<T>::identity();
    let mut x = *m;
    let mut squarings = 0u32;
    while (x - id).norm() > T::lit(0.05) {
        if squarings >= 64 {
            return Err(Error::LogBranchFailure(
                "square-root iteration did not approach the identity".into(),
            ));
        }
        x = sqrt_denman_beavers(&x)?;
        squarings += 1;
    }

    // log X = 2 atanh(Z), Z = (X - I)(X + I)^{-1}
    let z = (x - id)
        * (x + id)
            .try_inverse()
            .ok_or_else(|| Error::LogBranchFailure("X + I is singular".into()))?;
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    let eps = T::default_epsilon();
    for k in 1..200 {
        term *= z2;
        let add = term / T::from_int(2 * k + 1);
        sum += add;
        if add.amax() <= eps * sum.amax().max(eps) {
            break;
        }
    }
    let factor = T::lit(2.0) * T::lit(2f64.powi(squarings as i32));
    Ok(sum * factor)
}

fn sqrt_denman_beavers<T: Real>(m: &Matrix4<T>) -> Result<Matrix4<T>> {
    let half = T::lit(0.5);
    let mut y = *m;
    let mut z = Matrix4::<T>::identity();
    for _ in 0..100 {
        let yi = y
            .try_inverse()
            .ok_or_else(|| Error::LogBranchFailure("singular iterate in square root".into()))?;
        let zi = z
            .try_inverse()
            .ok_or_else(|| Error::LogBranchFailure("singular iterate in square root".into()))?;
        let y_next = (y + zi) * half;
        let z_next = (z + yi) * half;
        let change = (y_next - y).amax();
        y = y_next;
        z = z_next;
        if change <= T::default_epsilon() * T::lit(16.0) * y.amax() {
            return Ok(y);
        }
    }
    let check = (y * y - m).amax();
    if check <= T::tol(1e-12) * T::one().max(m.amax()) {
        Ok(y)
    } else {
        Err(Error::LogBranchFailure(
            "square-root iteration did not converge".into(),
        ))
    }
}

/// Eigenvalues of the linear flow matrix `2 J A`; for a positive definite `A`
/// these are `+-i W1`, `+-i W2`.
pub fn flow_eigenvalues<T: Real>(form: &QuadraticForm<T>) -> Vec<Complex<T>> {
    let j = symplectic_metric::<T>();
    let m = j * form.matrix() * T::lit(2.0);
    m.complex_eigenvalues().iter().copied().collect()
}

#[cfg(test)]
/// Upper 2x2 block of a 4x4 matrix.
pub(crate) fn upper_block<T: Real>(m: &Matrix4<T>) -> nalgebra::Matrix2<T> {
    m.fixed_view::<2, 2>(0, 0).into_owned()
}
