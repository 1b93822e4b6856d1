//! Fock-space check of the operator identity `U^dag v_j U = (S^{-1} v)_j`
//! for `U = exp(i v^T G v)` and `S = exp(2 J G)`.
//!
//! `U` is applied only to the kets of a low block `n1, n2 < levels`; the
//! identity is then compared on that block, where truncation of the full
//! basis enters only through the weight `U` pushes to the top shell.

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex;

use super::fock::{quadratic_operator, quadrature_operators, FockBasis};
use super::propagate::chebyshev_expm_apply;
use crate::error::{Error, Result};
use crate::model::symplectic_metric;
use crate::scalar::Real;
use crate::symplectic::{symplectic_generator, SymplecticTransform};

/// Residual of each quadrature and their maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugationReport<T> {
    pub residuals: [T; 4],
    pub max_residual: T,
    pub nmax: usize,
    pub levels: usize,
}

/// Checks `U^dag v_j U = sum_k (S^{-1})_jk v_k` on the lowest `levels` Fock
/// levels of each mode, using a basis of `nmax` levels per mode.
pub fn conjugation_check<T: Real>(
    g: &Matrix4<T>,
    s: &SymplecticTransform<T>,
    nmax: usize,
    levels: usize,
) -> Result<ConjugationReport<T>> {
    if levels == 0 || levels > nmax {
        return Err(Error::InvalidConfig(format!(
            "checked block ({levels} levels) must be non-empty and fit in nmax = {nmax}"
        )));
    }
    let j = symplectic_metric::<T>();
    let rebuilt = (j * g * T::lit(2.0)).exp();
    let mismatch = (rebuilt - s.matrix()).amax();
    if mismatch > T::tol(1e-10) * (T::one() + s.matrix().amax()) {
        return Err(Error::LogBranchFailure(format!(
            "exp(2JG) differs from S by {mismatch:e}"
        )));
    }

    let basis = FockBasis::new(nmax);
    let low: Vec<usize> = (0..levels)
        .flat_map(|n1| (0..levels).map(move |n2| (n1, n2)))
        .map(|(n1, n2)| basis.index(n1, n2))
        .collect();

    let k = quadratic_operator(g, nmax);
    let bounds = k.gershgorin_bounds();
    let zero = Complex::new(T::zero(), T::zero());
    let mut w = DMatrix::from_element(basis.dim(), low.len(), zero);
    for (c, &i) in low.iter().enumerate() {
        let mut e = vec![zero; basis.dim()];
        e[i] = Complex::new(T::one(), T::zero());
        // exp(i K) = exp(-i K t) at t = -1.
        let col = chebyshev_expm_apply(&k, bounds, &e, -T::one());
        w.column_mut(c).copy_from_slice(&col);
    }

    let ops = quadrature_operators::<T>(nmax);
    let sinv = s.inverse();
    let sinv = sinv.matrix();
    let dense: Vec<DMatrix<Complex<T>>> = ops
        .iter()
        .map(|o| DMatrix::from_fn(low.len(), low.len(), |a, b| o.get(low[a], low[b])))
        .collect();
    let mut residuals = [T::zero(); 4];
    for (jj, op) in ops.iter().enumerate() {
        let lhs = w.adjoint() * op.apply_columns(&w);
        let mut rhs = DMatrix::from_element(low.len(), low.len(), zero);
        for (kk, d) in dense.iter().enumerate() {
            rhs += d * Complex::new(sinv[(jj, kk)], T::zero());
        }
        residuals[jj] = (lhs - rhs)
            .singular_values()
            .iter()
            .fold(T::zero(), |m, v| m.max(*v));
    }
    let max_residual = residuals.iter().fold(T::zero(), |m, v| m.max(*v));
    Ok(ConjugationReport {
        residuals,
        max_residual,
        nmax,
        levels,
    })
}

/// [`conjugation_check`] with the generator extracted from `s`.
pub fn conjugation_check_for<T: Real>(
    s: &SymplecticTransform<T>,
    nmax: usize,
    levels: usize,
) -> Result<ConjugationReport<T>> {
    let g = symplectic_generator(s)?;
    conjugation_check(&g, s, nmax, levels)
}
