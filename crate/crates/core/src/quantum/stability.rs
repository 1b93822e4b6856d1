//! Time series of observables and robustness of the revival against timing
//! errors.
//!
//! Near the revival `P(T + e) = 1 - dH^2 e^2 + O(e^4)`, where `dH^2` is the
//! energy variance of the initial state, so the curvature of a quadratic fit
//! of `P(T + e)` measures that variance.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::fock::build_fock_hamiltonian;
use super::propagate::{Propagator, PropagationMethod};
use super::state::{survival_probability, QuantumState};
use crate::designer::RotationProtocol;
use crate::error::{Error, Result};
use crate::model::PhaseSpaceState;
use crate::scalar::Real;

/// A real series `values[k]` sampled at `times[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries<T> {
    pub label: String,
    pub times: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> ObservableSeries<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Writes `t,<label>` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,{}", self.label)?;
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(out, "{:.16e},{:.16e}", t, v)?;
        }
        Ok(())
    }
}

/// Least-squares `y = c0 + c1 x + c2 x^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFit<T> {
    pub c0: T,
    pub c1: T,
    pub c2: T,
    pub rms_residual: T,
}

impl<T: Real> QuadraticFit<T> {
    /// `-c2`, the decay rate of a peak at the origin.
    pub fn curvature(&self) -> T {
        -self.c2
    }
}

pub fn fit_quadratic<T: Real>(xs: &[T], ys: &[T]) -> Result<QuadraticFit<T>> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::InvalidConfig(
            "a quadratic fit needs at least three (x, y) pairs".into(),
        ));
    }
    // Scale the abscissa to O(1) so the design matrix is well conditioned.
    let scale = xs.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    if scale == T::zero() {
        return Err(Error::InvalidConfig("fit abscissae are all zero".into()));
    }
    let n = xs.len();
    let a = DMatrix::from_fn(n, 3, |i, j| (xs[i] / scale).powi(j as i32));
    let y = DVector::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let c = svd
        .solve(&y, T::lit(1e-14))
        .map_err(|e| Error::InvalidConfig(format!("quadratic fit failed: {e}")))?;
    let resid = &a * &c - &y;
    Ok(QuadraticFit {
        c0: c[0],
        c1: c[1] / scale,
        c2: c[2] / (scale * scale),
        rms_residual: (resid.norm_squared() / T::from_int(n)).sqrt(),
    })
}

/// `count` offsets evenly spread over `[-fraction T, fraction T]`.
pub fn symmetric_offsets<T: Real>(duration: T, fraction: T, count: usize) -> Vec<T> {
    let half = duration * fraction;
    if count < 2 {
        return vec![T::zero()];
    }
    (0..count)
        .map(|k| half * (T::lit(2.0) * T::from_int(k) / T::from_int(count - 1) - T::one()))
        .collect()
}

/// `P(T + e)` for each offset `e`, at the truncation of `psi0`.
pub fn stability_sweep<T: Real>(
    psi0: &QuantumState<T>,
    protocol: &RotationProtocol<T>,
    epsilons: &[T],
) -> Result<ObservableSeries<T>> {
    let h = build_fock_hamiltonian(&protocol.config(), psi0.nmax())?;
    let prop = Propagator::new(&h, PropagationMethod::Auto);
    let at_t = prop.evolve(psi0, protocol.duration)?;
    // Each offset is independent; the ordered collect keeps results in input
    // order regardless of scheduling.
    let values = epsilons
        .par_iter()
        .map(|&e| survival_probability(psi0, &prop.evolve(&at_t, e)?))
        .collect::<Result<Vec<T>>>()?;
    Ok(ObservableSeries {
        label: "survival".into(),
        times: epsilons.to_vec(),
        values,
    })
}

/// Stability sweep together with its quadratic fit and the energy variance
/// it should reproduce.
#[derive(Debug, Clone)]
pub struct StabilityReport<T> {
    pub series: ObservableSeries<T>,
    pub fit: QuadraticFit<T>,
    pub energy_variance: T,
}

impl<T: Real> StabilityReport<T> {
    pub fn relative_error(&self) -> T {
        ((self.fit.curvature() - self.energy_variance) / self.energy_variance).abs()
    }
}

pub fn stability_report<T: Real>(
    psi0: &QuantumState<T>,
    protocol: &RotationProtocol<T>,
    epsilons: &[T],
) -> Result<StabilityReport<T>> {
    let series = stability_sweep(psi0, protocol, epsilons)?;
    let fit = fit_quadratic(&series.times, &series.values)?;
    let h = build_fock_hamiltonian(&protocol.config(), psi0.nmax())?;
    Ok(StabilityReport {
        series,
        fit,
        energy_variance: psi0.energy_variance(&h)?,
    })
}

/// Mean excitation, survival probability and quadrature centroid along a run.
#[derive(Debug, Clone)]
pub struct EvolutionSeries<T> {
    pub times: Vec<T>,
    pub mean_excitation: Vec<T>,
    pub survival: Vec<T>,
    pub centroid: Vec<PhaseSpaceState<T>>,
    pub max_top_shell: T,
}

impl<T: Real> EvolutionSeries<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn excitation_series(&self) -> ObservableSeries<T> {
        ObservableSeries {
            label: "mean_excitation".into(),
            times: self.times.clone(),
            values: self.mean_excitation.clone(),
        }
    }

    pub fn survival_series(&self) -> ObservableSeries<T> {
        ObservableSeries {
            label: "survival".into(),
            times: self.times.clone(),
            values: self.survival.clone(),
        }
    }
}

/// Samples observables of `exp(-i H t) psi0` at the non-decreasing `times`.
pub fn evolution_series<T: Real>(
    psi0: &QuantumState<T>,
    prop: &Propagator<T>,
    times: &[T],
) -> Result<EvolutionSeries<T>> {
    let mut out = EvolutionSeries {
        times: times.to_vec(),
        mean_excitation: Vec::with_capacity(times.len()),
        survival: Vec::with_capacity(times.len()),
        centroid: Vec::with_capacity(times.len()),
        max_top_shell: T::zero(),
    };
    let mut failure = None;
    prop.evolve_along(psi0, times, |_, _, s| {
        out.mean_excitation.push(s.mean_excitation());
        match survival_probability(psi0, s) {
            Ok(p) => out.survival.push(p),
            Err(e) => failure = Some(e),
        }
        out.centroid.push(s.centroid());
        out.max_top_shell = out.max_top_shell.max(s.top_shell_weight());
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}
