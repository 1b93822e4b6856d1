//! Comparison of the truncated Fock spectrum with the normal-mode ladder
//! `W1 (j + 1/2) + W2 (j' + 1/2)`.

use super::fock::build_fock_hamiltonian;
use crate::error::Result;
use crate::model::TrapConfig;
use crate::scalar::Real;
use crate::symplectic::normal_modes;

/// One predicted level and the nearest computed eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelMatch<T> {
    pub j1: usize,
    pub j2: usize,
    pub expected: T,
    pub found: T,
    pub relative_error: T,
}

/// Matches every level with `j1 + j2 <= max_total` to the nearest eigenvalue
/// of the truncated Hamiltonian. Nearest rather than rank matching, because
/// levels with larger `j1 + j2` interleave with the ones checked.
pub fn spectrum_check<T: Real>(config: &TrapConfig<T>, nmax: usize, max_total: usize) -> Result<Vec<LevelMatch<T>>> {
    let modes = normal_modes(config)?;
    let eig = build_fock_hamiltonian(config, nmax)?.eigenvalues();
    let half = T::lit(0.5);
    let mut out = Vec::new();
    for j1 in 0..=max_total {
        for j2 in 0..=(max_total - j1) {
            let expected = modes.omega_cap1 * (T::from_int(j1) + half) + modes.omega_cap2 * (T::from_int(j2) + half);
            let found = eig
                .iter()
                .copied()
                .min_by(|a, b| {
                    (*a - expected)
                        .abs()
                        .partial_cmp(&(*b - expected).abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(T::zero());
            out.push(LevelMatch {
                j1,
                j2,
                expected,
                found,
                relative_error: ((found - expected) / expected).abs(),
            });
        }
    }
    Ok(out)
}
