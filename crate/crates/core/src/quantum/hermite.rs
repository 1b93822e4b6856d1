//! Normalized harmonic-oscillator eigenfunctions
//! `phi_n(x) = H_n(x) exp(-x^2/2) / sqrt(2^n n! sqrt(pi))`.
//!
//! The three-term recurrence on the normalized functions,
//! `phi_{n+1} = sqrt(2/(n+1)) x phi_n - sqrt(n/(n+1)) phi_{n-1}`, never forms
//! `H_n` or `n!` and so stays finite for any order.

use nalgebra::DMatrix;

use crate::scalar::Real;

/// `phi_0(x) .. phi_{count-1}(x)`.
pub fn hermite_functions<T: Real>(count: usize, x: T) -> Vec<T> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let two = T::lit(2.0);
    let phi0 = T::pi().powf(T::lit(-0.25)) * (-x * x / two).exp();
    out.push(phi0);
    if count > 1 {
        out.push(two.sqrt() * x * phi0);
    }
    for n in 1..count.saturating_sub(1) {
        let nf = T::from_int(n);
        let next = (two / (nf + T::one())).sqrt() * x * out[n]
            - (nf / (nf + T::one())).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// Table with `phi_n(xs[j])` at row `n`, column `j`.
pub fn hermite_table<T: Real>(count: usize, xs: &[T]) -> DMatrix<T> {
    let mut m = DMatrix::zeros(count, xs.len());
    for (j, &x) in xs.iter().enumerate() {
        for (n, v) in hermite_functions(count, x).into_iter().enumerate() {
            m[(n, j)] = v;
        }
    }
    m
}
