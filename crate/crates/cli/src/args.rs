//! Command-line grammar and the small value parsers it relies on.
//!
//! Frequencies are angular frequencies in rad/ms: `--x-khz f` means
//! `2 pi f` rad/ms (a frequency of f kHz), `--x-rad w` passes `w` through.
//! Times are reported in ms.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex;
use rotor_core::classical::Frame;
use rotor_core::quantum::StateSpec;

#[derive(Debug, Parser)]
#[command(name = "rotor", version, about = "Design and verify excitation-free rotations of a particle in an anisotropic harmonic trap")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Design a commensurate rotation protocol
    Design(DesignArgs),
    /// Normal-mode frequencies of a rotating trap, or a sweep in rotation velocity
    Modes(ModesArgs),
    /// Fock-space evolution of a state over one protocol
    Simulate(SimulateArgs),
    /// Classical phase-space trajectory over one protocol
    Classical(ClassicalArgs),
    /// Time-integrated position density of a coherent wavepacket
    Track(TrackArgs),
    /// Survival probability when the rotation lasts T + eps
    Stability(StabilityArgs),
    /// Re-run the command recorded in a run manifest
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Design(_) => "design",
            Command::Modes(_) => "modes",
            Command::Simulate(_) => "simulate",
            Command::Classical(_) => "classical",
            Command::Track(_) => "track",
            Command::Stability(_) => "stability",
            Command::Replay(_) => "replay",
        }
    }

    /// Redirects the output directory (used when replaying a manifest).
    pub fn set_out(&mut self, dir: PathBuf) {
        match self {
            Command::Design(a) => a.out = Some(dir),
            Command::Modes(a) => a.out = Some(dir),
            Command::Simulate(a) => a.out = Some(dir),
            Command::Classical(a) => a.out = Some(dir),
            Command::Track(a) => a.out = Some(dir),
            Command::Stability(a) => a.out = Some(dir),
            Command::Replay(_) => {}
        }
    }
}

/// Slow-axis frequency, target angle and integer pair of a protocol.
#[derive(Debug, Clone, Args)]
pub struct ProtocolArgs {
    /// Slow-axis trap frequency in kHz [default: 1]
    #[arg(long, conflicts_with = "omega1_rad")]
    pub omega1_khz: Option<f64>,
    /// Slow-axis angular frequency in rad/ms
    #[arg(long)]
    pub omega1_rad: Option<f64>,
    /// Target rotation angle (radians, or forms like pi/2, 3pi/2, 2pi)
    #[arg(long, default_value = "pi/2", value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta_f: f64,
    #[arg(long, default_value_t = 1)]
    pub n1: u32,
    #[arg(long, default_value_t = 2)]
    pub n2: u32,
}

impl ProtocolArgs {
    pub fn omega1(&self) -> f64 {
        angular(self.omega1_khz, self.omega1_rad).unwrap_or(2.0 * PI)
    }
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Emit the four reference designs (1, 2, 5 and 10 kHz, quarter turn, n = (1, 2))
    #[arg(long)]
    pub table1: bool,
    /// Also write design.csv and a manifest to this directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModesArgs {
    #[arg(long, conflicts_with = "omega1_rad")]
    pub omega1_khz: Option<f64>,
    #[arg(long)]
    pub omega1_rad: Option<f64>,
    /// Fast-axis frequency in kHz [default for --sweep: 1.5 omega1]
    #[arg(long, conflicts_with = "omega2_rad")]
    pub omega2_khz: Option<f64>,
    #[arg(long)]
    pub omega2_rad: Option<f64>,
    #[arg(long, conflicts_with = "theta_dot_rad")]
    pub theta_dot_khz: Option<f64>,
    #[arg(long)]
    pub theta_dot_rad: Option<f64>,
    /// Sweep the rotation velocity from 0 up to the positivity bound
    #[arg(long, conflicts_with_all = ["theta_dot_khz", "theta_dot_rad"])]
    pub sweep: bool,
    /// Number of sweep points, both ends included
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    /// Output directory for the sweep CSV [default: rotor-out]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// ground | entangled | fock:n1,n2 | coherent:a1,a2 (complex, e.g. 0.5+0.2i or 1/sqrt2)
    #[arg(long, default_value = "ground", value_parser = parse_state)]
    pub state: StateSpec<f64>,
    /// Comma-separated observables: N (mean excitation), P (survival probability)
    #[arg(long, default_value = "N,P", value_parser = parse_observables)]
    pub observables: Observables,
    /// Number of samples over [0, t_end]
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    /// End time in ms [default: the protocol duration]
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Fixed truncation per mode instead of the doubling search
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Compare quadrature means with the classical trajectory of the centroid
    #[arg(long)]
    pub check_classical: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassicalArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub q1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub q2: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub p1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub p2: f64,
    /// Start at the centroid of a coherent amplitude (overrides q1, p1)
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub alpha1: Option<Complex<f64>>,
    /// Start at the centroid of a coherent amplitude (overrides q2, p2)
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub alpha2: Option<Complex<f64>>,
    #[arg(long, default_value_t = 1001)]
    pub samples: usize,
    /// rotating | normal | lab
    #[arg(long, default_value = "rotating")]
    pub frame: Frame,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[arg(long, default_value = "8/sqrt2", value_parser = parse_complex, allow_hyphen_values = true)]
    pub alpha1: Complex<f64>,
    #[arg(long, default_value = "2/sqrt2", value_parser = parse_complex, allow_hyphen_values = true)]
    pub alpha2: Complex<f64>,
    /// Truncation per mode [default: the starting truncation of the doubling search, capped at max_nmax]
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Grid spacing in dimensionless position units
    #[arg(long, default_value_t = 0.1)]
    pub spacing: f64,
    /// Padding around the classical orbit, in ground-state widths
    #[arg(long, default_value_t = 3.0)]
    pub margin: f64,
    /// Trapezoid intervals over [0, T] (even)
    #[arg(long, default_value_t = 2000)]
    pub time_steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[arg(long, conflicts_with = "omega1_rad")]
    pub omega1_khz: Option<f64>,
    #[arg(long)]
    pub omega1_rad: Option<f64>,
    #[arg(long, default_value = "pi/2", value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta_f: f64,
    #[arg(long, default_value_t = 1)]
    pub n1: u32,
    /// Comma-separated n2 values, one curve each
    #[arg(long, default_value = "2,5,10", value_delimiter = ',')]
    pub n2_list: Vec<u32>,
    /// Half-width of the timing-error window as a fraction of T
    #[arg(long, default_value_t = 0.01)]
    pub eps_range: f64,
    /// Offsets per curve, both ends included
    #[arg(long, default_value_t = 21)]
    pub points: usize,
    #[arg(long, default_value = "ground", value_parser = parse_state)]
    pub state: StateSpec<f64>,
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run
    pub manifest: PathBuf,
    /// Output directory for the reproduced files [default: rotor-replay]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Which observables `simulate` writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observables {
    pub excitation: bool,
    pub survival: bool,
}

/// Angular frequency in rad/ms from the kHz or rad/ms form, if either was given.
pub fn angular(khz: Option<f64>, rad: Option<f64>) -> Option<f64> {
    khz.map(|f| 2.0 * PI * f).or(rad)
}

/// Radians, or a multiple/fraction of pi such as `pi/2`, `3pi/2`, `-pi`, `2*pi`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace('π', "pi");
    let Some(pos) = t.find("pi") else {
        return t.parse().map_err(|_| format!("cannot read angle '{s}'"));
    };
    let coef = t[..pos].trim().trim_end_matches('*');
    let c = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| format!("cannot read angle '{s}'"))?,
    };
    let rest = t[pos + 2..].trim();
    let d = if rest.is_empty() {
        1.0
    } else {
        rest.strip_prefix('/')
            .and_then(|x| x.trim().parse::<f64>().ok())
            .filter(|d| *d != 0.0)
            .ok_or_else(|| format!("cannot read angle '{s}'"))?
    };
    Ok(c * PI / d)
}

/// A real number, optionally followed by `/sqrt2`.
fn parse_real(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let (num, scale) = match t.strip_suffix("/sqrt2").or_else(|| t.strip_suffix("/sqrt(2)")) {
        Some(n) => (n, std::f64::consts::FRAC_1_SQRT_2),
        None => (t, 1.0),
    };
    let v = match num {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| format!("cannot read number '{s}'"))?,
    };
    Ok(v * scale)
}

/// `x`, `yi`, or `x+yi` / `x-yi`, where each part may carry `/sqrt2`.
pub fn parse_complex(s: &str) -> Result<Complex<f64>, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = t.strip_suffix('i') else {
        return parse_real(&t).map(|re| Complex::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok(Complex::new(parse_real(&body[..k])?, parse_real(&body[k..])?)),
        None => Ok(Complex::new(0.0, parse_real(body)?)),
    }
}

pub fn parse_state(s: &str) -> Result<StateSpec<f64>, String> {
    let t = s.trim();
    let (kind, rest) = t.split_once(':').unwrap_or((t, ""));
    let pair = |rest: &str| -> Result<(String, String), String> {
        rest.split_once(',')
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .ok_or_else(|| format!("state '{s}' needs two comma-separated values"))
    };
    match kind {
        "ground" if rest.is_empty() => Ok(StateSpec::Ground),
        "entangled" if rest.is_empty() => Ok(StateSpec::Entangled),
        "fock" => {
            let (a, b) = pair(rest)?;
            let n = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("bad Fock index '{x}'"));
            Ok(StateSpec::Fock { n1: n(&a)?, n2: n(&b)? })
        }
        "coherent" => {
            let (a, b) = pair(rest)?;
            Ok(StateSpec::Coherent {
                alpha1: parse_complex(&a)?,
                alpha2: parse_complex(&b)?,
            })
        }
        _ => Err(format!(
            "unknown state '{s}' (expected ground, entangled, fock:n1,n2 or coherent:a1,a2)"
        )),
    }
}

pub fn parse_observables(s: &str) -> Result<Observables, String> {
    let mut out = Observables {
        excitation: false,
        survival: false,
    };
    for part in s.split(',').map(str::trim) {
        match part {
            "N" => out.excitation = true,
            "P" => out.survival = true,
            other => return Err(format!("unknown observable '{other}' (expected N or P)")),
        }
    }
    Ok(out)
}
