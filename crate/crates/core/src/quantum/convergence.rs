//! Truncation control: tolerances, the starting basis size and the doubling
//! loop that establishes convergence of the revival.

use std::str::FromStr;

use super::fock::build_fock_hamiltonian;
use super::propagate::{Propagator, PropagationMethod};
use super::state::{survival_probability, QuantumState, StateSpec};
use crate::designer::RotationProtocol;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Environment variable that overrides [`Tolerances::default`].
pub const TOLERANCE_ENV: &str = "ROTOR_TOL";

/// Convergence thresholds for truncated simulations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Largest change of `P(T)` between successive truncations.
    pub survival_change: f64,
    /// Largest weight allowed on the outermost Fock shell.
    pub top_shell: f64,
    /// Truncation at which the doubling loop gives up.
    pub max_nmax: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            survival_change: 1e-8,
            top_shell: 1e-8,
            max_nmax: 128,
        }
    }
}

impl FromStr for Tolerances {
    type Err = String;

    /// Accepts either one number (used for both thresholds) or a comma list of
    /// `survival=..`, `top_shell=..`, `max_nmax=..` pairs.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut tol = Tolerances::default();
        let s = s.trim();
        if s.is_empty() {
            return Ok(tol);
        }
        let positive = |v: &str| -> std::result::Result<f64, String> {
            let x: f64 = v.trim().parse().map_err(|_| format!("bad tolerance '{v}'"))?;
            if x.is_finite() && x > 0.0 {
                Ok(x)
            } else {
                Err(format!("tolerance must be positive and finite (got '{v}')"))
            }
        };
        if !s.contains('=') {
            let x = positive(s)?;
            tol.survival_change = x;
            tol.top_shell = x;
            return Ok(tol);
        }
        for part in s.split(',') {
            let (key, val) = part
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got '{part}'"))?;
            match key.trim() {
                "survival" => tol.survival_change = positive(val)?,
                "top_shell" => tol.top_shell = positive(val)?,
                "max_nmax" => {
                    tol.max_nmax = val
                        .trim()
                        .parse()
                        .map_err(|_| format!("bad max_nmax '{val}'"))?
                }
                other => return Err(format!("unknown tolerance key '{other}'")),
            }
        }
        Ok(tol)
    }
}

impl Tolerances {
    /// Defaults, overridden by `ROTOR_TOL` when it is set.
    pub fn from_env() -> std::result::Result<Self, String> {
        match std::env::var(TOLERANCE_ENV) {
            Ok(v) => v.parse(),
            Err(_) => Ok(Self::default()),
        }
    }
}

/// Starting truncation `max(16, ceil(4 N + 10))` for mean excitation `N`.
pub fn initial_nmax(mean_excitation: f64) -> usize {
    let guess = (4.0 * mean_excitation.max(0.0) + 10.0).ceil() as usize;
    guess.max(16)
}

/// Evidence gathered at one truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationStep {
    pub nmax: usize,
    pub survival: f64,
    pub top_shell: f64,
    pub excitation_change: f64,
}

/// Initial and final state at the truncation that passed the convergence test.
#[derive(Debug, Clone)]
pub struct ConvergedRevival<T: Real> {
    pub nmax: usize,
    pub initial: QuantumState<T>,
    pub final_state: QuantumState<T>,
    pub trace: Vec<TruncationStep>,
}

impl<T: Real> ConvergedRevival<T> {
    pub fn survival(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |s| s.survival)
    }

    pub fn excitation_change(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |s| s.excitation_change)
    }
}

/// Doubles the truncation from [`initial_nmax`] until `P(T)` moves by less
/// than `tol.survival_change` and the final top-shell weight is below
/// `tol.top_shell`.
pub fn converge_revival<T: Real>(
    spec: &StateSpec<T>,
    protocol: &RotationProtocol<T>,
    tol: &Tolerances,
) -> Result<ConvergedRevival<T>> {
    let mut nmax = initial_nmax(spec.mean_excitation()).max(spec.min_nmax());
    let mut trace: Vec<TruncationStep> = Vec::new();
    loop {
        if nmax > tol.max_nmax {
            return Err(Error::NonConvergence(format!(
                "revival not converged up to nmax = {} (trace: {:?})",
                tol.max_nmax, trace
            )));
        }
        let psi0 = match spec.build(nmax) {
            Ok(s) => s,
            Err(Error::TruncationTooSmall(_)) => {
                nmax *= 2;
                continue;
            }
            Err(e) => return Err(e),
        };
        let h = build_fock_hamiltonian(&protocol.config(), nmax)?;
        let prop = Propagator::new(&h, PropagationMethod::Auto);
        let psit = prop.evolve(&psi0, protocol.duration)?;
        let step = TruncationStep {
            nmax,
            survival: survival_probability(&psi0, &psit)?.as_f64(),
            top_shell: psit.top_shell_weight().as_f64(),
            excitation_change: (psit.mean_excitation() - psi0.mean_excitation()).as_f64(),
        };
        let settled = trace
            .last()
            .is_some_and(|prev| (prev.survival - step.survival).abs() < tol.survival_change);
        trace.push(step);
        if settled && step.top_shell < tol.top_shell {
            return Ok(ConvergedRevival {
                nmax,
                initial: psi0,
                final_state: psit,
                trace,
            });
        }
        nmax *= 2;
    }
}
