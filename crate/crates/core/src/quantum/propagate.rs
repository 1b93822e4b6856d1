//! Exact propagation `psi(t) = exp(-i H t) psi(0)` for a time-independent
//! truncated Hamiltonian.
//!
//! Small bases use the eigendecomposition of each parity block (real
//! symmetric in the `i^n2` gauge). Large bases, where a dense
//! eigendecomposition would dominate the run time, use a Chebyshev expansion
//! of the exponential whose coefficients are Bessel functions; it is accurate
//! to round-off once the series is cut where the coefficients drop below
//! `1e-18`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use super::fock::{gauge_phase, CsrMatrix, FockBasis, FockHamiltonian};
use super::state::QuantumState;
use crate::error::Result;
use crate::scalar::Real;

/// Largest basis dimension for which [`PropagationMethod::Auto`] picks the
/// eigendecomposition.
pub const SPECTRAL_DIM_LIMIT: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagationMethod {
    Auto,
    Spectral,
    Chebyshev,
}

/// `J_k(x)` for `k = 0..=kmax`, by Miller's backward recurrence normalized
/// with `J_0 + 2 sum_k J_2k = 1`.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    let x = x.abs();
    if x < 1e-150 {
        // J_0 = 1 - O(x^2), J_1 = x/2, higher orders underflow.
        out[0] = 1.0;
        if kmax >= 1 {
            out[1] = 0.5 * x;
        }
        return out;
    }
    let top = kmax.max(x.ceil() as usize);
    let mut start = top + (160.0 * top as f64).sqrt() as usize + 20;
    start += start % 2;
    let mut vals = vec![0.0; start + 2];
    vals[start] = 1e-300;
    for k in (1..=start).rev() {
        vals[k - 1] = 2.0 * k as f64 / x * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > 1e250 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let norm = vals[0] + 2.0 * vals.iter().skip(2).step_by(2).sum::<f64>();
    for (o, v) in out.iter_mut().zip(&vals) {
        *o = v / norm;
    }
    out
}

/// Chebyshev coefficients `c_k` with `exp(-i x y) = sum_k c_k T_k(y)` on
/// `[-1, 1]`, truncated once they stay below `1e-18`.
fn chebyshev_coefficients(x: f64) -> Vec<Complex<f64>> {
    let ax = x.abs();
    let kmax = (ax + 12.0 * ax.cbrt() + 40.0) as usize;
    let j = bessel_j_sequence(ax, kmax);
    // (-i)^k for forward time, i^k for backward time.
    let unit = if x >= 0.0 {
        Complex::new(0.0, -1.0)
    } else {
        Complex::new(0.0, 1.0)
    };
    let mut phase = Complex::new(1.0, 0.0);
    let mut c = Vec::with_capacity(kmax + 1);
    for (k, jk) in j.iter().enumerate() {
        let scale = if k == 0 { 1.0 } else { 2.0 };
        c.push(phase * (scale * jk));
        phase *= unit;
    }
    let keep = c.iter().rposition(|z| z.norm() > 1e-18).map_or(1, |p| p + 1);
    c.truncate(keep.max(1));
    c
}

/// `exp(-i M t) x` for a Hermitian sparse `M` whose spectrum lies in `bounds`.
pub fn chebyshev_expm_apply<T: Real>(
    m: &CsrMatrix<T>,
    bounds: (T, T),
    x: &[Complex<T>],
    t: T,
) -> Vec<Complex<T>> {
    let n = m.dim();
    let (lo, hi) = (bounds.0.as_f64(), bounds.1.as_f64());
    let centre = 0.5 * (hi + lo);
    // A slight widening keeps round-off in the bounds from pushing the
    // scaled spectrum outside [-1, 1].
    let radius = 0.5 * (hi - lo) * (1.0 + 1e-10);
    let tf = t.as_f64();
    let shift = Complex::new(0.0, -centre * tf).exp();
    let shift = Complex::new(T::lit(shift.re), T::lit(shift.im));
    if x.is_empty() || tf == 0.0 {
        return x.to_vec();
    }
    if hi <= lo {
        // The spectrum is the single point `centre`.
        return x.iter().map(|v| *v * shift).collect();
    }
    let coeffs: Vec<Complex<T>> = chebyshev_coefficients(radius * tf)
        .into_iter()
        .map(|z| Complex::new(T::lit(z.re), T::lit(z.im)))
        .collect();
    let (c_t, r_t) = (T::lit(centre), T::lit(radius));
    let scaled = |v: &[Complex<T>], out: &mut [Complex<T>]| {
        m.matvec_into(v, out);
        for (o, vi) in out.iter_mut().zip(v) {
            *o = (*o - *vi * c_t) / r_t;
        }
    };
    let zero = Complex::new(T::zero(), T::zero());
    let mut prev = x.to_vec();
    let mut acc: Vec<Complex<T>> = x.iter().map(|v| *v * coeffs[0]).collect();
    if coeffs.len() > 1 {
        let mut cur = vec![zero; n];
        scaled(&prev, &mut cur);
        for (a, v) in acc.iter_mut().zip(&cur) {
            *a += *v * coeffs[1];
        }
        let mut next = vec![zero; n];
        let two = T::lit(2.0);
        for ck in coeffs.iter().skip(2) {
            scaled(&cur, &mut next);
            for ((nx, p), a) in next.iter_mut().zip(&prev).zip(acc.iter_mut()) {
                *nx = *nx * two - *p;
                *a += *nx * *ck;
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
    }
    for a in acc.iter_mut() {
        *a *= shift;
    }
    acc
}

/// One parity block: gauge-basis eigenvectors and energies.
#[derive(Debug, Clone)]
struct SpectralBlock<T: Real> {
    indices: Vec<usize>,
    energies: DVector<T>,
    vectors: DMatrix<T>,
}

#[derive(Debug, Clone)]
enum Engine<T: Real> {
    Spectral(Vec<SpectralBlock<T>>),
    Chebyshev { bounds: (T, T) },
}

/// Reusable `exp(-i H t)` for one Hamiltonian.
#[derive(Debug, Clone)]
pub struct Propagator<T: Real> {
    hamiltonian: FockHamiltonian<T>,
    engine: Engine<T>,
}

impl<T: Real> Propagator<T> {
    pub fn new(h: &FockHamiltonian<T>, method: PropagationMethod) -> Self {
        let spectral = match method {
            PropagationMethod::Spectral => true,
            PropagationMethod::Chebyshev => false,
            PropagationMethod::Auto => h.dim() <= SPECTRAL_DIM_LIMIT,
        };
        let engine = if spectral {
            let blocks = (0..2)
                .map(|parity| h.parity_indices(parity))
                .filter(|idx| !idx.is_empty())
                .map(|indices| {
                    let eig = h.real_block(&indices).symmetric_eigen();
                    SpectralBlock {
                        indices,
                        energies: eig.eigenvalues,
                        vectors: eig.eigenvectors,
                    }
                })
                .collect();
            Engine::Spectral(blocks)
        } else {
            Engine::Chebyshev {
                bounds: h.matrix().gershgorin_bounds(),
            }
        };
        Self {
            hamiltonian: h.clone(),
            engine,
        }
    }

    pub fn hamiltonian(&self) -> &FockHamiltonian<T> {
        &self.hamiltonian
    }

    pub fn method(&self) -> PropagationMethod {
        match self.engine {
            Engine::Spectral(_) => PropagationMethod::Spectral,
            Engine::Chebyshev { .. } => PropagationMethod::Chebyshev,
        }
    }

    /// `exp(-i H t) psi`.
    pub fn evolve(&self, psi: &QuantumState<T>, t: T) -> Result<QuantumState<T>> {
        psi.check_hamiltonian(&self.hamiltonian)?;
        if t == T::zero() {
            return Ok(psi.clone());
        }
        let out = match &self.engine {
            Engine::Chebyshev { bounds } => DVector::from_vec(chebyshev_expm_apply(
                self.hamiltonian.matrix(),
                *bounds,
                psi.coeffs().as_slice(),
                t,
            )),
            Engine::Spectral(blocks) => {
                let modal = self.to_modal(blocks, psi);
                self.modal_to_fock(blocks, &modal, t)
            }
        };
        Ok(QuantumState::from_raw(psi.nmax(), out))
    }

    /// Calls `visit(k, t_k, psi(t_k))` for each of the non-decreasing `times`.
    pub fn evolve_along<F>(&self, psi: &QuantumState<T>, times: &[T], mut visit: F) -> Result<()>
    where
        F: FnMut(usize, T, &QuantumState<T>),
    {
        psi.check_hamiltonian(&self.hamiltonian)?;
        match &self.engine {
            Engine::Spectral(blocks) => {
                let modal = self.to_modal(blocks, psi);
                for (k, &t) in times.iter().enumerate() {
                    if t == T::zero() {
                        visit(k, t, psi);
                    } else {
                        let s = QuantumState::from_raw(psi.nmax(), self.modal_to_fock(blocks, &modal, t));
                        visit(k, t, &s);
                    }
                }
            }
            Engine::Chebyshev { .. } => {
                let mut state = psi.clone();
                let mut now = T::zero();
                for (k, &t) in times.iter().enumerate() {
                    state = self.evolve(&state, t - now)?;
                    now = t;
                    visit(k, t, &state);
                }
            }
        }
        Ok(())
    }

    /// Coefficients in each block's eigenbasis (real and imaginary parts).
    fn to_modal(&self, blocks: &[SpectralBlock<T>], psi: &QuantumState<T>) -> Vec<(DVector<T>, DVector<T>)> {
        let basis = psi.basis();
        blocks
            .iter()
            .map(|b| {
                let g = gauged(&basis, psi.coeffs(), &b.indices);
                let re = DVector::from_iterator(g.len(), g.iter().map(|z| z.re));
                let im = DVector::from_iterator(g.len(), g.iter().map(|z| z.im));
                (b.vectors.tr_mul(&re), b.vectors.tr_mul(&im))
            })
            .collect()
    }

    fn modal_to_fock(
        &self,
        blocks: &[SpectralBlock<T>],
        modal: &[(DVector<T>, DVector<T>)],
        t: T,
    ) -> DVector<Complex<T>> {
        let basis = self.hamiltonian.basis();
        let mut out = DVector::from_element(basis.dim(), Complex::new(T::zero(), T::zero()));
        for (b, (re, im)) in blocks.iter().zip(modal) {
            let n = b.indices.len();
            let (mut yr, mut yi) = (DVector::zeros(n), DVector::zeros(n));
            for k in 0..n {
                let (s, c) = (b.energies[k] * t).sin_cos();
                // (re + i im) * (c - i s)
                yr[k] = re[k] * c + im[k] * s;
                yi[k] = im[k] * c - re[k] * s;
            }
            let (xr, xi) = (&b.vectors * yr, &b.vectors * yi);
            for (k, &i) in b.indices.iter().enumerate() {
                out[i] = gauge_phase::<T>(&basis, i) * Complex::new(xr[k], xi[k]);
            }
        }
        out
    }
}

/// Block coefficients in the `i^n2` gauge, `c'_n = conj(phase_n) c_n`.
fn gauged<T: Real>(basis: &FockBasis, c: &DVector<Complex<T>>, idx: &[usize]) -> Vec<Complex<T>> {
    idx.iter()
        .map(|&i| gauge_phase::<T>(basis, i).conj() * c[i])
        .collect()
}

/// One-shot `exp(-i H t) psi` with the automatically chosen method.
pub fn evolve<T: Real>(state: &QuantumState<T>, h: &FockHamiltonian<T>, t: T) -> Result<QuantumState<T>> {
    state.check_hamiltonian(h)?;
    if t == T::zero() {
        return Ok(state.clone());
    }
    if h.dim() <= SPECTRAL_DIM_LIMIT / 4 {
        Propagator::new(h, PropagationMethod::Spectral).evolve(state, t)
    } else {
        // A single time point never pays for an eigendecomposition.
        Propagator::new(h, PropagationMethod::Chebyshev).evolve(state, t)
    }
}
