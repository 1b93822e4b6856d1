//! Time-integrated position density ("track") of an evolving wavepacket,
//! `P(q1, q2) = int_0^T |psi(q1, q2, t)|^2 dt`.
//!
//! The wavefunction on the grid is `Phi1^T C(t) Phi2`, with `C` the Fock
//! coefficients arranged as an `nmax x nmax` matrix and `Phij` tables of
//! Hermite functions. The time integral uses the trapezoid rule; the same
//! samples at every second point give a half-resolution estimate used as a
//! convergence check.

use std::io::{self, Write};

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::fock::build_fock_hamiltonian;
use super::hermite::hermite_table;
use super::propagate::{Propagator, PropagationMethod};
use super::state::QuantumState;
use crate::designer::RotationProtocol;
use crate::error::{Error, Result};
use crate::model::PhaseSpaceState;
use crate::scalar::Real;

/// Width of the ground-state density `exp(-q^2)` used for margins and the
/// ridge test (the distance at which it falls by `1/e`).
pub const GROUND_STATE_WIDTH: f64 = 1.0;

/// Number of independent time chunks; fixed so the reduction order, and with
/// it every bit of the result, does not depend on the thread count.
const TIME_CHUNKS: usize = 8;

/// Spatial grid and time quadrature of a track.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub q1_min: T,
    pub q1_max: T,
    pub q2_min: T,
    pub q2_max: T,
    pub spacing: T,
    /// Trapezoid intervals over `[0, T]`; must be even.
    pub time_steps: usize,
    /// Largest relative change allowed between the full and half-resolution
    /// time quadratures.
    pub quadrature_tolerance: T,
    /// Largest top-shell weight tolerated along the run.
    pub top_shell_tolerance: T,
}

impl<T: Real> GridSpec<T> {
    /// Box around `points` padded by `margin` ground-state widths.
    pub fn around(points: &[PhaseSpaceState<T>], margin: T, spacing: T) -> Self {
        let pad = margin * T::lit(GROUND_STATE_WIDTH);
        let fold = |f: fn(&PhaseSpaceState<T>) -> T| {
            points.iter().fold((T::zero(), T::zero()), |(lo, hi), p| {
                let v = f(p);
                (lo.min(v), hi.max(v))
            })
        };
        let (a1, b1) = fold(|p| p.q1);
        let (a2, b2) = fold(|p| p.q2);
        Self {
            q1_min: a1 - pad,
            q1_max: b1 + pad,
            q2_min: a2 - pad,
            q2_max: b2 + pad,
            spacing,
            time_steps: 2000,
            quadrature_tolerance: T::lit(0.01),
            top_shell_tolerance: T::lit(1e-8),
        }
    }

    fn axis(lo: T, hi: T, h: T) -> Vec<T> {
        let n = ((hi - lo) / h).ceil().as_f64().max(1.0) as usize;
        (0..=n).map(|k| lo + h * T::from_int(k)).collect()
    }

    pub fn q1_axis(&self) -> Vec<T> {
        Self::axis(self.q1_min, self.q1_max, self.spacing)
    }

    pub fn q2_axis(&self) -> Vec<T> {
        Self::axis(self.q2_min, self.q2_max, self.spacing)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.spacing > T::zero()
            && self.q1_max > self.q1_min
            && self.q2_max > self.q2_min
            && self.time_steps >= 2
            && self.time_steps.is_multiple_of(2);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "invalid track grid {self:?} (needs a positive spacing, non-empty ranges and an even step count)"
            )))
        }
    }
}

/// Time-integrated density on a uniform grid, `density[(i, j)]` at
/// `(q1_axis[i], q2_axis[j])`.
#[derive(Debug, Clone)]
pub struct TrackGrid<T: Real> {
    pub q1_axis: Vec<T>,
    pub q2_axis: Vec<T>,
    pub density: DMatrix<T>,
    pub duration: T,
    pub nmax: usize,
    pub time_steps: usize,
    /// `max |P_full - P_half| / max P_full`.
    pub quadrature_change: T,
    pub max_top_shell: T,
}

impl<T: Real> TrackGrid<T> {
    fn spacing(&self) -> (T, T) {
        let d = |a: &[T]| if a.len() > 1 { a[1] - a[0] } else { T::one() };
        (d(&self.q1_axis), d(&self.q2_axis))
    }

    /// `sum P dq1 dq2`, which should equal the duration.
    pub fn integral(&self) -> T {
        let (h1, h2) = self.spacing();
        self.density.sum() * h1 * h2
    }

    /// Bilinear interpolation; zero outside the grid.
    pub fn value_at(&self, q1: T, q2: T) -> T {
        let (h1, h2) = self.spacing();
        let (n1, n2) = (self.q1_axis.len(), self.q2_axis.len());
        let x = (q1 - self.q1_axis[0]) / h1;
        let y = (q2 - self.q2_axis[0]) / h2;
        if x < T::zero() || y < T::zero() {
            return T::zero();
        }
        let (i, j) = (x.floor().as_f64() as usize, y.floor().as_f64() as usize);
        if i + 1 >= n1 || j + 1 >= n2 {
            return T::zero();
        }
        let (fx, fy) = (x - T::from_int(i), y - T::from_int(j));
        let one = T::one();
        let d = &self.density;
        d[(i, j)] * (one - fx) * (one - fy)
            + d[(i + 1, j)] * fx * (one - fy)
            + d[(i, j + 1)] * (one - fx) * fy
            + d[(i + 1, j + 1)] * fx * fy
    }

    /// Grid point with the largest density.
    pub fn argmax(&self) -> (T, T) {
        let (mut bi, mut bj, mut best) = (0, 0, T::zero());
        for i in 0..self.q1_axis.len() {
            for j in 0..self.q2_axis.len() {
                if self.density[(i, j)] > best {
                    best = self.density[(i, j)];
                    bi = i;
                    bj = j;
                }
            }
        }
        (self.q1_axis[bi], self.q2_axis[bj])
    }

    /// Signed offset `s` of the density maximum nearest to `point` along the
    /// line `point + s * direction` (`direction` is normalized here), searched
    /// over `|s| <= reach`. `None` when the density has no interior maximum
    /// on that segment.
    pub fn ridge_offset(&self, point: (T, T), direction: (T, T), reach: T) -> Option<T> {
        let norm = (direction.0 * direction.0 + direction.1 * direction.1).sqrt();
        if norm == T::zero() {
            return None;
        }
        let (u1, u2) = (direction.0 / norm, direction.1 / norm);
        let (h1, h2) = self.spacing();
        let step = h1.min(h2) * T::lit(0.25);
        let count = (reach / step).ceil().as_f64() as usize;
        let samples: Vec<(T, T)> = (0..=2 * count)
            .map(|k| {
                let s = step * (T::from_int(k) - T::from_int(count));
                (s, self.value_at(point.0 + s * u1, point.1 + s * u2))
            })
            .collect();
        let mut best: Option<T> = None;
        for k in 1..samples.len() - 1 {
            let (s, v) = samples[k];
            if v > samples[k - 1].1 && v >= samples[k + 1].1 {
                // Parabolic refinement through the three samples.
                let (a, b, c) = (samples[k - 1].1, v, samples[k + 1].1);
                let denom = a - T::lit(2.0) * b + c;
                let shift = if denom < T::zero() {
                    T::lit(0.5) * (a - c) / denom * step
                } else {
                    T::zero()
                };
                let cand = s + shift;
                if best.is_none_or(|b: T| cand.abs() < b.abs()) {
                    best = Some(cand);
                }
            }
        }
        best
    }

    /// Writes `q1,q2,density` rows (q2 fastest) with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "q1,q2,density")?;
        for (i, q1) in self.q1_axis.iter().enumerate() {
            for (j, q2) in self.q2_axis.iter().enumerate() {
                writeln!(out, "{:.16e},{:.16e},{:.16e}", q1, q2, self.density[(i, j)])?;
            }
        }
        Ok(())
    }
}

/// `|Phi1^T C Phi2|^2` for the coefficient matrix of `state`.
fn grid_density<T: Real>(state: &QuantumState<T>, phi1: &DMatrix<T>, phi2: &DMatrix<T>) -> DMatrix<T> {
    let n = state.nmax();
    let c = state.coeffs();
    let re = DMatrix::from_fn(n, n, |i, j| c[i * n + j].re);
    let im = DMatrix::from_fn(n, n, |i, j| c[i * n + j].im);
    let pr = phi1.tr_mul(&(re * phi2));
    let pi = phi1.tr_mul(&(im * phi2));
    pr.component_mul(&pr) + pi.component_mul(&pi)
}

/// Accumulates the track of `psi0` over one protocol duration.
pub fn wavepacket_track<T: Real>(
    psi0: &QuantumState<T>,
    protocol: &RotationProtocol<T>,
    grid: &GridSpec<T>,
) -> Result<TrackGrid<T>> {
    grid.validate()?;
    let nmax = psi0.nmax();
    let h = build_fock_hamiltonian(&protocol.config(), nmax)?;
    let prop = Propagator::new(&h, PropagationMethod::Chebyshev);
    let (q1_axis, q2_axis) = (grid.q1_axis(), grid.q2_axis());
    let phi1 = hermite_table(nmax, &q1_axis);
    let phi2 = hermite_table(nmax, &q2_axis);
    let steps = grid.time_steps;
    let duration = protocol.duration;
    let dt = duration / T::from_int(steps);
    let times: Vec<T> = (0..=steps).map(|k| dt * T::from_int(k)).collect();

    let per_chunk = steps.div_ceil(TIME_CHUNKS);
    let chunks: Vec<(usize, usize)> = (0..TIME_CHUNKS)
        .map(|c| (c * per_chunk, ((c + 1) * per_chunk).min(steps + 1)))
        .filter(|(a, b)| a < b)
        .collect();
    let zero_grid = || DMatrix::<T>::zeros(q1_axis.len(), q2_axis.len());
    let partials = chunks
        .par_iter()
        .map(|&(a, b)| -> Result<(DMatrix<T>, DMatrix<T>, T)> {
            let (mut fine, mut coarse, mut top) = (zero_grid(), zero_grid(), T::zero());
            let start = prop.evolve(psi0, times[a])?;
            let local: Vec<T> = times[a..b].iter().map(|t| *t - times[a]).collect();
            prop.evolve_along(&start, &local, |offset, _, s| {
                let k = a + offset;
                let end = k == 0 || k == steps;
                let w_fine = if end { dt * T::lit(0.5) } else { dt };
                let d = grid_density(s, &phi1, &phi2);
                fine += &d * w_fine;
                if k % 2 == 0 {
                    let w_coarse = if end { dt } else { dt * T::lit(2.0) };
                    coarse += &d * w_coarse;
                }
                top = top.max(s.top_shell_weight());
            })?;
            Ok((fine, coarse, top))
        })
        .collect::<Result<Vec<_>>>()?;

    let (mut fine, mut coarse, mut top) = (zero_grid(), zero_grid(), T::zero());
    for (f, c, t) in partials {
        fine += f;
        coarse += c;
        top = top.max(t);
    }
    if top > grid.top_shell_tolerance {
        return Err(Error::TruncationTooSmall(format!(
            "top-shell weight reached {top:e} at nmax = {nmax}"
        )));
    }
    let peak = fine.max();
    let change = if peak > T::zero() {
        (&fine - &coarse).amax() / peak
    } else {
        T::zero()
    };
    if change > grid.quadrature_tolerance {
        return Err(Error::NonConvergence(format!(
            "time quadrature changes by {change:e} when the step is halved"
        )));
    }
    Ok(TrackGrid {
        q1_axis,
        q2_axis,
        density: fine,
        duration,
        nmax,
        time_steps: steps,
        quadrature_change: change,
        max_top_shell: top,
    })
}
