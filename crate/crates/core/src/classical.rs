//! Exact classical flow of the rotating-frame Hamiltonian.
//!
//! In normal-mode coordinates each `(Qj, Pj)` pair rotates rigidly with
//! frequency `Wj`; the rotating-frame flow is that rotation conjugated by `S`.

use std::io::{self, Write};

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::model::{PhaseSpaceState, TrapConfig};
use crate::scalar::Real;
use crate::symplectic::{from_normal_coords, normal_modes, to_normal_coords, NormalModes};

/// Which coordinates a trajectory is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    Rotating,
    Normal,
    Lab,
}

impl Frame {
    pub fn tag(&self) -> &'static str {
        match self {
            Frame::Rotating => "rotating",
            Frame::Normal => "normal",
            Frame::Lab => "lab",
        }
    }
}

impl std::str::FromStr for Frame {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "rotating" => Ok(Frame::Rotating),
            "normal" => Ok(Frame::Normal),
            "lab" => Ok(Frame::Lab),
            other => Err(format!("unknown frame '{other}'")),
        }
    }
}

/// Exact harmonic rotation in each normal-mode plane.
pub fn propagate_normal<T: Real>(
    state: &PhaseSpaceState<T>,
    modes: &NormalModes<T>,
    t: T,
) -> PhaseSpaceState<T> {
    let rot = |q: T, p: T, w: T| {
        let (s, c) = (w * t).sin_cos();
        (q * c + p / w * s, p * c - w * q * s)
    };
    let (q1, p1) = rot(state.q1, state.p1, modes.omega_cap1);
    let (q2, p2) = rot(state.q2, state.p2, modes.omega_cap2);
    PhaseSpaceState::new(q1, q2, p1, p2)
}

/// Time-`t` map of the rotating-frame dynamics for a fixed configuration.
#[derive(Debug, Clone, Copy)]
pub struct RotatingFlow<T: Real> {
    modes: NormalModes<T>,
}

impl<T: Real> RotatingFlow<T> {
    pub fn new(config: &TrapConfig<T>) -> Result<Self> {
        Ok(Self {
            modes: normal_modes(config)?,
        })
    }

    pub fn modes(&self) -> &NormalModes<T> {
        &self.modes
    }

    pub fn at(&self, state: &PhaseSpaceState<T>, t: T) -> PhaseSpaceState<T> {
        if t == T::zero() {
            return *state;
        }
        let big = to_normal_coords(state, &self.modes);
        from_normal_coords(&propagate_normal(&big, &self.modes, t), &self.modes)
    }

    /// Jacobian `S R(t) S^{-1}` of the flow.
    pub fn matrix(&self, t: T) -> Matrix4<T> {
        let (w1, w2) = (self.modes.omega_cap1, self.modes.omega_cap2);
        let (s1, c1) = (w1 * t).sin_cos();
        let (s2, c2) = (w2 * t).sin_cos();
        let z = T::zero();
        #[rustfmt::skip]
        let r = Matrix4::new(
            c1,       z,        s1 / w1, z,
            z,        c2,       z,       s2 / w2,
            -w1 * s1, z,        c1,      z,
            z,        -w2 * s2, z,       c2,
        );
        self.modes.transform.matrix() * r * self.modes.inverse_transform().matrix()
    }
}

pub fn propagate_rotating<T: Real>(
    state: &PhaseSpaceState<T>,
    config: &TrapConfig<T>,
    t: T,
) -> Result<PhaseSpaceState<T>> {
    Ok(RotatingFlow::new(config)?.at(state, t))
}

/// Rotating-frame coordinates back to the lab frame for a trap at angle `theta`.
///
/// The rotating frame is `q~ = R(theta) x` with
/// `R(theta) = [[cos, sin], [-sin, cos]]`, so this applies `R(theta)^T` to the
/// position pair and to the momentum pair.
pub fn lab_frame_state<T: Real>(state: &PhaseSpaceState<T>, theta: T) -> PhaseSpaceState<T> {
    let (s, c) = theta.sin_cos();
    PhaseSpaceState::new(
        c * state.q1 - s * state.q2,
        s * state.q1 + c * state.q2,
        c * state.p1 - s * state.p2,
        s * state.p1 + c * state.p2,
    )
}

/// Mass and Planck constant used to undo the dimensionless scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalScale<T> {
    pub mass: T,
    pub hbar: T,
}

impl<T: Real> PhysicalScale<T> {
    /// `m = hbar = 1`: lengths in units where only the trap frequencies remain.
    pub fn natural() -> Self {
        Self {
            mass: T::one(),
            hbar: T::one(),
        }
    }
}

/// Dimensionless rotating-frame coordinates to physical rotating-frame ones,
/// `q~_j = q_j sqrt(hbar / (m w_j))`, `p~_j = p_j sqrt(m hbar w_j)`.
pub fn unscale<T: Real>(
    state: &PhaseSpaceState<T>,
    config: &TrapConfig<T>,
    scale: &PhysicalScale<T>,
) -> PhaseSpaceState<T> {
    let len = |w: T| (scale.hbar / (scale.mass * w)).sqrt();
    let mom = |w: T| (scale.mass * scale.hbar * w).sqrt();
    let (w1, w2) = (config.omega1(), config.omega2());
    PhaseSpaceState::new(
        state.q1 * len(w1),
        state.q2 * len(w2),
        state.p1 * mom(w1),
        state.p2 * mom(w2),
    )
}

/// Physical lab-frame state at time `t` of a rotation started at angle zero.
pub fn lab_state_at<T: Real>(
    state: &PhaseSpaceState<T>,
    config: &TrapConfig<T>,
    scale: &PhysicalScale<T>,
    t: T,
) -> PhaseSpaceState<T> {
    let physical = config.to_input_axes(unscale(state, config, scale));
    lab_frame_state(&physical, config.theta_dot() * t)
}

/// Sampled trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<PhaseSpaceState<T>>,
    pub frame: Frame,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Re-expresses a rotating-frame trajectory in another frame.
    pub fn to_frame(&self, frame: Frame, flow: &RotatingFlow<T>) -> Result<Self> {
        if self.frame != Frame::Rotating {
            return Err(Error::InvalidConfig(
                "only rotating-frame trajectories can be converted".into(),
            ));
        }
        let config = flow.modes().config();
        let states = self
            .times
            .iter()
            .zip(&self.states)
            .map(|(&t, s)| match frame {
                Frame::Rotating => *s,
                Frame::Normal => to_normal_coords(s, flow.modes()),
                Frame::Lab => lab_state_at(s, config, &PhysicalScale::natural(), t),
            })
            .collect();
        Ok(Self {
            times: self.times.clone(),
            states,
            frame,
        })
    }

    /// Frame-tagged file name, e.g. `trajectory_rotating.csv`.
    pub fn file_name(&self) -> String {
        format!("trajectory_{}.csv", self.frame.tag())
    }

    /// Writes `t,q1,q2,p1,p2` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,q1,q2,p1,p2")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                t, s.q1, s.q2, s.p1, s.p2
            )?;
        }
        Ok(())
    }
}

/// Samples the rotating-frame trajectory on `times` (non-negative, strictly increasing).
pub fn sample_trajectory<T: Real>(
    state0: &PhaseSpaceState<T>,
    config: &TrapConfig<T>,
    times: &[T],
) -> Result<Trajectory<T>> {
    if times.iter().any(|t| *t < T::zero()) {
        return Err(Error::InvalidConfig("sample times must be non-negative".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig(
            "sample times must be strictly increasing".into(),
        ));
    }
    let flow = RotatingFlow::new(config)?;
    let big0 = to_normal_coords(state0, flow.modes());
    let states = times
        .iter()
        .map(|&t| {
            if t == T::zero() {
                *state0
            } else {
                from_normal_coords(&propagate_normal(&big0, flow.modes(), t), flow.modes())
            }
        })
        .collect();
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        frame: Frame::Rotating,
    })
}

/// `n` evenly spaced times covering `[0, t_end]` (a single zero when `n == 1`).
pub fn uniform_grid<T: Real>(t_end: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![T::zero()],
        _ => (0..n)
            .map(|k| t_end * T::from_int(k) / T::from_int(n - 1))
            .collect(),
    }
}
