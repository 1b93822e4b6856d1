//! Two-mode states on the truncated Fock basis and their basic observables.

use nalgebra::DVector;
use num_complex::Complex;

use super::fock::{FockBasis, FockHamiltonian};
use crate::error::{Error, Result};
use crate::model::PhaseSpaceState;
use crate::scalar::Real;

/// Largest Poisson tail a truncated coherent state may drop per mode.
pub const COHERENT_TAIL_LIMIT: f64 = 1e-10;

/// Normalized coefficient vector over `|n1, n2>`, row-major in `(n1, n2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState<T: Real> {
    nmax: usize,
    coeffs: DVector<Complex<T>>,
}

fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

impl<T: Real> QuantumState<T> {
    /// Wraps raw amplitudes, normalizing them.
    pub fn from_amplitudes(nmax: usize, coeffs: DVector<Complex<T>>) -> Result<Self> {
        if coeffs.len() != nmax * nmax {
            return Err(Error::DimensionMismatch {
                expected: nmax * nmax,
                found: coeffs.len(),
            });
        }
        let norm = coeffs.norm();
        if !(norm > T::zero()) || !norm.as_f64().is_finite() {
            return Err(Error::InvalidConfig("state has zero or non-finite norm".into()));
        }
        Ok(Self {
            nmax,
            coeffs: coeffs / Complex::new(norm, T::zero()),
        })
    }

    /// Amplitudes already known to be normalized (propagator output).
    pub(crate) fn from_raw(nmax: usize, coeffs: DVector<Complex<T>>) -> Self {
        debug_assert_eq!(coeffs.len(), nmax * nmax);
        Self { nmax, coeffs }
    }

    /// Number state `|n1, n2>`.
    pub fn fock(n1: usize, n2: usize, nmax: usize) -> Result<Self> {
        if n1 >= nmax || n2 >= nmax {
            return Err(Error::TruncationTooSmall(format!(
                "|{n1},{n2}> does not fit below nmax = {nmax}"
            )));
        }
        let mut c = DVector::from_element(nmax * nmax, czero());
        c[FockBasis::new(nmax).index(n1, n2)] = Complex::new(T::one(), T::zero());
        Ok(Self::from_raw(nmax, c))
    }

    pub fn ground(nmax: usize) -> Result<Self> {
        Self::fock(0, 0, nmax)
    }

    /// `(|0,1> + |1,0>)/sqrt(2)`.
    pub fn entangled(nmax: usize) -> Result<Self> {
        if nmax < 2 {
            return Err(Error::TruncationTooSmall("entangled state needs nmax >= 2".into()));
        }
        let b = FockBasis::new(nmax);
        let mut c = DVector::from_element(nmax * nmax, czero());
        let a = Complex::new(T::one() / T::lit(2.0).sqrt(), T::zero());
        c[b.index(0, 1)] = a;
        c[b.index(1, 0)] = a;
        Ok(Self::from_raw(nmax, c))
    }

    /// Product of single-mode coherent states, renormalized after truncation.
    pub fn coherent(alpha1: Complex<T>, alpha2: Complex<T>, nmax: usize) -> Result<Self> {
        let m1 = coherent_amplitudes(alpha1, nmax)?;
        let m2 = coherent_amplitudes(alpha2, nmax)?;
        let mut c = DVector::from_element(nmax * nmax, czero());
        for (n1, a) in m1.iter().enumerate() {
            for (n2, b) in m2.iter().enumerate() {
                c[n1 * nmax + n2] = *a * *b;
            }
        }
        Self::from_amplitudes(nmax, c)
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    pub fn dim(&self) -> usize {
        self.nmax * self.nmax
    }

    pub fn basis(&self) -> FockBasis {
        FockBasis::new(self.nmax)
    }

    pub fn coeffs(&self) -> &DVector<Complex<T>> {
        &self.coeffs
    }

    pub fn amplitude(&self, n1: usize, n2: usize) -> Complex<T> {
        self.coeffs[self.basis().index(n1, n2)]
    }

    pub fn norm(&self) -> T {
        self.coeffs.norm()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.same_size(other)?;
        Ok(self.coeffs.dotc(&other.coeffs))
    }

    pub(crate) fn same_size(&self, other: &Self) -> Result<()> {
        if self.nmax == other.nmax {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.nmax,
                found: other.nmax,
            })
        }
    }

    /// Re-expresses the state on a different truncation. Shrinking fails if it
    /// would drop more than `1e-12` of the weight.
    pub fn resized(&self, nmax: usize) -> Result<Self> {
        if nmax == self.nmax {
            return Ok(self.clone());
        }
        let mut c = DVector::from_element(nmax * nmax, czero());
        let mut dropped = T::zero();
        for i in 0..self.dim() {
            let (n1, n2) = self.basis().levels(i);
            if n1 < nmax && n2 < nmax {
                c[n1 * nmax + n2] = self.coeffs[i];
            } else {
                dropped += self.coeffs[i].norm_sqr();
            }
        }
        if dropped > T::lit(1e-12) {
            return Err(Error::TruncationTooSmall(format!(
                "shrinking to nmax = {nmax} drops weight {dropped:e}"
            )));
        }
        Self::from_amplitudes(nmax, c)
    }

    /// Total probability on kets with `n1 = nmax - 1` or `n2 = nmax - 1`.
    pub fn top_shell_weight(&self) -> T {
        let b = self.basis();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| b.is_top_shell(*i))
            .fold(T::zero(), |acc, (_, z)| acc + z.norm_sqr())
    }

    /// `(<a1^dag a1>, <a2^dag a2>)`.
    pub fn mode_occupations(&self) -> (T, T) {
        let b = self.basis();
        let (mut n1s, mut n2s) = (T::zero(), T::zero());
        for (i, z) in self.coeffs.iter().enumerate() {
            let (n1, n2) = b.levels(i);
            let w = z.norm_sqr();
            n1s += w * T::from_int(n1);
            n2s += w * T::from_int(n2);
        }
        (n1s, n2s)
    }

    /// `<a1^dag a1 + a2^dag a2>`.
    pub fn mean_excitation(&self) -> T {
        let (a, b) = self.mode_occupations();
        a + b
    }

    /// `(<a1>, <a2>)`.
    pub fn ladder_means(&self) -> (Complex<T>, Complex<T>) {
        let b = self.basis();
        let (mut a1, mut a2) = (czero::<T>(), czero::<T>());
        for i in 0..self.dim() {
            let (n1, n2) = b.levels(i);
            let c = self.coeffs[i];
            if n1 > 0 {
                a1 += self.coeffs[b.index(n1 - 1, n2)].conj() * c * T::from_int(n1).sqrt();
            }
            if n2 > 0 {
                a2 += self.coeffs[b.index(n1, n2 - 1)].conj() * c * T::from_int(n2).sqrt();
            }
        }
        (a1, a2)
    }

    /// Quadrature means `(<q1>, <q2>, <p1>, <p2>)` with
    /// `<q> = sqrt(2) Re<a>` and `<p> = sqrt(2) Im<a>`.
    pub fn centroid(&self) -> PhaseSpaceState<T> {
        let (a1, a2) = self.ladder_means();
        let r2 = T::lit(2.0).sqrt();
        PhaseSpaceState::new(r2 * a1.re, r2 * a2.re, r2 * a1.im, r2 * a2.im)
    }

    /// `<H>` for a Hamiltonian on the same truncation.
    pub fn energy(&self, h: &FockHamiltonian<T>) -> Result<T> {
        self.check_hamiltonian(h)?;
        Ok(self.coeffs.dotc(&h.apply(&self.coeffs)).re)
    }

    /// `<H^2> - <H>^2`, evaluated with the truncated matrix.
    pub fn energy_variance(&self, h: &FockHamiltonian<T>) -> Result<T> {
        self.check_hamiltonian(h)?;
        let hpsi = h.apply(&self.coeffs);
        let mean = self.coeffs.dotc(&hpsi).re;
        Ok((hpsi.norm_squared() - mean * mean).max(T::zero()))
    }

    pub(crate) fn check_hamiltonian(&self, h: &FockHamiltonian<T>) -> Result<()> {
        if h.nmax() == self.nmax {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: h.nmax(),
                found: self.nmax,
            })
        }
    }
}

/// Single-mode coherent amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)` for `n < nmax`,
/// rejecting truncations whose dropped tail exceeds [`COHERENT_TAIL_LIMIT`].
fn coherent_amplitudes<T: Real>(alpha: Complex<T>, nmax: usize) -> Result<Vec<Complex<T>>> {
    let mag2 = alpha.norm_sqr().as_f64();
    if !mag2.is_finite() {
        return Err(Error::InvalidConfig(format!("non-finite coherent amplitude {alpha}")));
    }
    // Poisson weights in log form, summed from the first dropped level until
    // they are negligible and decreasing.
    let mut log_w = -mag2;
    let mut tail = 0.0;
    for n in 0.. {
        if n > 0 {
            log_w += mag2.ln() - (n as f64).ln();
        }
        if n >= nmax {
            let w = log_w.exp();
            tail += w;
            if n as f64 > mag2 && w < 1e-20 {
                break;
            }
        }
    }
    if tail > COHERENT_TAIL_LIMIT {
        return Err(Error::TruncationTooSmall(format!(
            "coherent amplitude {alpha} loses weight {tail:e} above nmax = {nmax}"
        )));
    }
    let mut out = Vec::with_capacity(nmax);
    let mut c = Complex::new(T::lit((-0.5 * mag2).exp()), T::zero());
    for n in 0..nmax {
        if n > 0 {
            c = c * alpha / T::from_int(n).sqrt();
        }
        out.push(c);
    }
    Ok(out)
}

/// Builds a two-mode coherent state; see [`QuantumState::coherent`].
pub fn coherent_state<T: Real>(alpha1: Complex<T>, alpha2: Complex<T>, nmax: usize) -> Result<QuantumState<T>> {
    QuantumState::coherent(alpha1, alpha2, nmax)
}

/// `|<psi_t|psi_0>|^2`.
pub fn survival_probability<T: Real>(psi0: &QuantumState<T>, psit: &QuantumState<T>) -> Result<T> {
    let ov = psit.inner(psi0)?;
    Ok(ov.norm_sqr().min(T::one()))
}

pub fn mean_excitation<T: Real>(state: &QuantumState<T>) -> T {
    state.mean_excitation()
}

/// Recipe for an initial state, independent of the truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpec<T> {
    Ground,
    Entangled,
    Fock { n1: usize, n2: usize },
    Coherent { alpha1: Complex<T>, alpha2: Complex<T> },
}

impl<T: Real> StateSpec<T> {
    pub fn build(&self, nmax: usize) -> Result<QuantumState<T>> {
        match *self {
            StateSpec::Ground => QuantumState::ground(nmax),
            StateSpec::Entangled => QuantumState::entangled(nmax),
            StateSpec::Fock { n1, n2 } => QuantumState::fock(n1, n2, nmax),
            StateSpec::Coherent { alpha1, alpha2 } => QuantumState::coherent(alpha1, alpha2, nmax),
        }
    }

    /// Mean excitation of the untruncated state.
    pub fn mean_excitation(&self) -> f64 {
        match *self {
            StateSpec::Ground => 0.0,
            StateSpec::Entangled => 1.0,
            StateSpec::Fock { n1, n2 } => (n1 + n2) as f64,
            StateSpec::Coherent { alpha1, alpha2 } => (alpha1.norm_sqr() + alpha2.norm_sqr()).as_f64(),
        }
    }

    /// Smallest truncation that can hold the state at all.
    pub fn min_nmax(&self) -> usize {
        match *self {
            StateSpec::Fock { n1, n2 } => n1.max(n2) + 1,
            _ => 2,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            StateSpec::Ground => "ground".into(),
            StateSpec::Entangled => "entangled".into(),
            StateSpec::Fock { n1, n2 } => format!("fock:{n1},{n2}"),
            StateSpec::Coherent { alpha1, alpha2 } => {
                let fmt = |a: Complex<T>| {
                    if a.im == T::zero() {
                        format!("{:.17e}", a.re.as_f64())
                    } else {
                        format!("{:.17e}{:+.17e}i", a.re.as_f64(), a.im.as_f64())
                    }
                };
                format!("coherent:{},{}", fmt(alpha1), fmt(alpha2))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    #[test]
    fn vacuum_coherent_state_is_ground() {
        let s = QuantumState::coherent(c(0.0), c(0.0), 8).unwrap();
        assert_eq!(s, QuantumState::ground(8).unwrap());
        assert_eq!(s.mean_excitation(), 0.0);
    }

    #[test]
    fn benchmark_states_have_unit_excitation() {
        let r = 1.0 / 2f64.sqrt();
        let coh = QuantumState::coherent(c(r), c(r), 24).unwrap();
        assert!((coh.mean_excitation() - 1.0).abs() < 1e-10);
        let ent = QuantumState::<f64>::entangled(4).unwrap();
        assert!((ent.mean_excitation() - 1.0).abs() < 1e-15);
        assert!((ent.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn displaced_coherent_state_centroid() {
        let r = 2f64.sqrt();
        let s = QuantumState::coherent(c(8.0 / r), c(2.0 / r), 96).unwrap();
        let m = s.centroid();
        assert!((m.q1 - 8.0).abs() < 1e-10);
        assert!((m.q2 - 2.0).abs() < 1e-10);
        assert!(m.p1.abs() < 1e-12 && m.p2.abs() < 1e-12);
        let imag = QuantumState::coherent(Complex::new(0.0, 1.0), c(0.0), 30).unwrap();
        assert!((imag.centroid().p1 - r).abs() < 1e-10);
    }

    #[test]
    fn truncation_tail_is_enforced() {
        let err = QuantumState::coherent(c(8.0 / 2f64.sqrt()), c(0.0), 40).unwrap_err();
        assert!(matches!(err, Error::TruncationTooSmall(_)));
        assert!(QuantumState::<f64>::fock(3, 0, 3).is_err());
    }

    #[test]
    fn survival_of_identical_and_orthogonal_states() {
        let a = QuantumState::<f64>::fock(1, 0, 4).unwrap();
        let b = QuantumState::<f64>::fock(0, 1, 4).unwrap();
        assert_eq!(survival_probability(&a, &a).unwrap(), 1.0);
        assert_eq!(survival_probability(&a, &b).unwrap(), 0.0);
        let big = QuantumState::<f64>::ground(5).unwrap();
        assert!(survival_probability(&a, &big).is_err());
    }

    #[test]
    fn top_shell_and_resize() {
        let s = QuantumState::<f64>::fock(3, 1, 4).unwrap();
        assert_eq!(s.top_shell_weight(), 1.0);
        let g = QuantumState::<f64>::ground(4).unwrap();
        assert_eq!(g.top_shell_weight(), 0.0);
        let grown = g.resized(9).unwrap();
        assert_eq!(grown.amplitude(0, 0), c(1.0));
        assert!(s.resized(3).is_err());
    }

    #[test]
    fn spec_builds_and_labels() {
        let spec = StateSpec::<f64>::Fock { n1: 1, n2: 2 };
        assert_eq!(spec.min_nmax(), 3);
        assert_eq!(spec.build(3).unwrap().amplitude(1, 2), c(1.0));
        assert_eq!(StateSpec::<f64>::Ground.label(), "ground");
    }
}
