use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};

use num_complex::Complex;
use rotor_core::classical::{uniform_grid, Frame};
use rotor_core::designer::ground_state_variance;
use rotor_core::quantum::{
    build_fock_hamiltonian, converge_revival, evolution_series, initial_nmax, revival_phase,
    stability_report, symmetric_offsets, wavepacket_track, GridSpec, PropagationMethod,
    Propagator, QuantumState, StateSpec, Tolerances,
};
use rotor_core::symplectic::normal_frequency_squares;
use rotor_core::{
    design_protocol, lab_frame_state, normal_modes, sample_trajectory, PhaseSpaceState,
    RotatingFlow, RotationProtocol, TrapConfig,
};

use crate::args::{
    angular, ClassicalArgs, DesignArgs, ModesArgs, ProtocolArgs, SimulateArgs, StabilityArgs,
    TrackArgs,
};
use crate::error::CliError;
use crate::manifest::{csv_row, RunOutput, TraceRecord};

/// Settings shared by every command of one invocation.
pub struct Context {
    pub tolerances: Tolerances,
    /// Arguments recorded in the manifest.
    pub args: Vec<String>,
}

const DEFAULT_OUT: &str = "rotor-out";

fn out_dir(out: &Option<PathBuf>) -> PathBuf {
    out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// rad/ms to the kHz value of `omega = 2 pi f`.
fn khz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

fn protocol_params(out: &mut RunOutput, p: &RotationProtocol<f64>) {
    out.param("omega1_rad_per_ms", p.omega1);
    out.param("omega2_rad_per_ms", p.omega2);
    out.param("theta_dot_rad_per_ms", p.theta_dot);
    out.param("theta_f", p.theta_f);
    out.param("n1", p.n1);
    out.param("n2", p.n2);
    out.param("duration_ms", p.duration);
}

fn design_from(args: &ProtocolArgs) -> Result<RotationProtocol<f64>, CliError> {
    let p = design_protocol(args.omega1(), args.theta_f, args.n1, args.n2)?;
    if let Some(w) = p.reduction_warning() {
        eprintln!("warning: {w}");
    }
    Ok(p)
}

fn finish(out: RunOutput, dir: &Path) -> Result<(), CliError> {
    let path = out.write(dir)?;
    println!("manifest: {}", path.display());
    Ok(())
}

pub fn design(a: &DesignArgs, ctx: &Context) -> Result<(), CliError> {
    let requests: Vec<(f64, f64, u32, u32)> = if a.table1 {
        [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|f| (2.0 * PI * f, FRAC_PI_2, 1, 2))
            .collect()
    } else {
        let p = &a.protocol;
        vec![(p.omega1(), p.theta_f, p.n1, p.n2)]
    };
    let mut rows = Vec::new();
    for (w1, tf, n1, n2) in requests {
        let p = design_protocol(w1, tf, n1, n2)?;
        if let Some(w) = p.reduction_warning() {
            eprintln!("warning: {w}");
        }
        let m = normal_modes(&p.config())?;
        rows.push((p, m.omega_cap1, m.omega_cap2));
    }

    println!("frequencies as f = omega / 2pi in kHz, durations in ms");
    println!(
        "{:>4} {:>4} {:>10} {:>12} {:>12} {:>12} {:>12} {:>10} {:>10} {:>12} {:>12}",
        "n1", "n2", "theta_f", "omega1", "omega2", "theta_dot", "T", "kappa-", "kappa+", "Omega1", "Omega2"
    );
    for (p, w1, w2) in &rows {
        println!(
            "{:>4} {:>4} {:>10.6} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>10.6} {:>10.6} {:>12.6} {:>12.6}",
            p.n1,
            p.n2,
            p.theta_f,
            khz(p.omega1),
            khz(p.omega2),
            khz(p.theta_dot),
            p.duration,
            p.kappa_minus,
            p.kappa_plus,
            khz(*w1),
            khz(*w2)
        );
    }

    if let Some(dir) = &a.out {
        let mut out = RunOutput::new("design", &ctx.args, &ctx.tolerances);
        out.param("table1", a.table1);
        let mut body = String::from(
            "n1,n2,theta_f,omega1_khz,omega2_khz,theta_dot_khz,duration_ms,kappa_minus,kappa_plus,omega_cap1_khz,omega_cap2_khz\n",
        );
        for (p, w1, w2) in &rows {
            body.push_str(&format!(
                "{},{},{}\n",
                p.n1,
                p.n2,
                csv_row(&[
                    p.theta_f,
                    khz(p.omega1),
                    khz(p.omega2),
                    khz(p.theta_dot),
                    p.duration,
                    p.kappa_minus,
                    p.kappa_plus,
                    khz(*w1),
                    khz(*w2),
                ])
            ));
        }
        out.csv("design.csv", body);
        finish(out, dir)?;
    }
    Ok(())
}

pub fn modes(a: &ModesArgs, ctx: &Context) -> Result<(), CliError> {
    let w1 = angular(a.omega1_khz, a.omega1_rad).unwrap_or(2.0 * PI);
    let w2 = angular(a.omega2_khz, a.omega2_rad);

    if a.sweep {
        if a.points < 2 {
            return Err(CliError::usage("--points must be at least 2"));
        }
        let trap = TrapConfig::new(w1, w2.unwrap_or(1.5 * w1), 0.0, PI)?;
        let bound = trap.omega1();
        let mut body = String::from("theta_dot_khz,omega_cap1_khz,omega_cap2_khz,boundary\n");
        for k in 0..a.points {
            let boundary = k + 1 == a.points;
            // The last point sits exactly on the bound.
            let td = if boundary {
                bound
            } else {
                bound * k as f64 / (a.points - 1) as f64
            };
            let (s1, s2) = normal_frequency_squares(&trap.with_theta_dot(td));
            body.push_str(&format!(
                "{},{}\n",
                csv_row(&[khz(td), khz(s1.max(0.0).sqrt()), khz(s2.sqrt())]),
                u8::from(boundary)
            ));
        }
        println!(
            "sweep of {} rotation velocities up to the maximum allowed theta_dot = omega1 = {:.6} kHz (flagged boundary = 1, where Omega1 = 0)",
            a.points,
            khz(bound)
        );
        let mut out = RunOutput::new("modes", &ctx.args, &ctx.tolerances);
        out.param("omega1_rad_per_ms", trap.omega1());
        out.param("omega2_rad_per_ms", trap.omega2());
        out.param("points", a.points);
        out.csv("modes_sweep.csv", body);
        return finish(out, &out_dir(&a.out));
    }

    let w2 = w2.ok_or_else(|| CliError::usage("--omega2-khz or --omega2-rad is required without --sweep"))?;
    let td = angular(a.theta_dot_khz, a.theta_dot_rad).unwrap_or(0.0);
    let c = TrapConfig::new(w1, w2, td, PI)?;
    let bound = c.omega1();
    if (td.abs() - bound).abs() <= 1e-12 * bound {
        return Err(CliError::physics(format!(
            "theta_dot = {:.6} kHz is the maximum allowed rotation velocity (omega1): the slow normal frequency vanishes and becomes imaginary beyond it",
            khz(td)
        )));
    }
    let m = normal_modes(&c)?;
    println!("Omega1 = {:.12} kHz ({:.12} rad/ms)", khz(m.omega_cap1), m.omega_cap1);
    println!("Omega2 = {:.12} kHz ({:.12} rad/ms)", khz(m.omega_cap2), m.omega_cap2);
    println!("Omega2/Omega1 = {:.12}", m.omega_cap2 / m.omega_cap1);
    println!("eta = {:.12}, alpha = {:.12} rad", c.eta(), m.alpha);
    if c.axes_swapped() {
        println!("note: omega1 > omega2 was given; the axes were relabelled so the slow axis comes first");
    }
    if let Some(dir) = &a.out {
        let mut out = RunOutput::new("modes", &ctx.args, &ctx.tolerances);
        out.param("omega1_rad_per_ms", c.omega1());
        out.param("omega2_rad_per_ms", c.omega2());
        out.param("theta_dot_rad_per_ms", td);
        let body = format!(
            "theta_dot_khz,omega_cap1_khz,omega_cap2_khz,alpha\n{}\n",
            csv_row(&[khz(td), khz(m.omega_cap1), khz(m.omega_cap2), m.alpha])
        );
        out.csv("modes.csv", body);
        finish(out, dir)?;
    }
    Ok(())
}

/// Runs the doubling search (or uses a fixed truncation) and records the trace.
fn settle_truncation(
    spec: &StateSpec<f64>,
    p: &RotationProtocol<f64>,
    fixed: Option<usize>,
    ctx: &Context,
    out: &mut RunOutput,
    label: &str,
) -> Result<usize, CliError> {
    match fixed {
        Some(n) => Ok(n),
        None => {
            let conv = converge_revival(spec, p, &ctx.tolerances)?;
            for s in &conv.trace {
                out.trace(TraceRecord::from_step(label, s));
            }
            Ok(conv.nmax)
        }
    }
}

fn state_kind(spec: &StateSpec<f64>) -> &'static str {
    match spec {
        StateSpec::Ground => "ground",
        StateSpec::Entangled => "entangled",
        StateSpec::Fock { .. } => "fock",
        StateSpec::Coherent { .. } => "coherent",
    }
}

pub fn simulate(a: &SimulateArgs, ctx: &Context) -> Result<(), CliError> {
    let p = design_from(&a.protocol)?;
    let t_end = a.t_end.unwrap_or(p.duration);
    if !(t_end >= 0.0) {
        return Err(CliError::usage("--t-end must be non-negative"));
    }
    if a.samples == 0 || (a.samples < 2 && t_end > 0.0) {
        return Err(CliError::usage("--samples must be at least 2 for a non-empty interval"));
    }
    if !a.observables.excitation && !a.observables.survival && !a.check_classical {
        return Err(CliError::usage("nothing to output"));
    }
    let label = a.state.label();
    let mut out = RunOutput::new("simulate", &ctx.args, &ctx.tolerances);
    protocol_params(&mut out, &p);
    out.param("state", label.clone());
    out.param("t_end_ms", t_end);
    out.param("samples", a.samples);

    let nmax = settle_truncation(&a.state, &p, a.nmax, ctx, &mut out, &label)?;
    out.param("nmax", nmax);
    let psi0 = a.state.build(nmax)?;
    let h = build_fock_hamiltonian(&p.config(), nmax)?;
    let prop = Propagator::new(&h, PropagationMethod::Auto);
    let times = if t_end == 0.0 {
        vec![0.0]
    } else {
        uniform_grid(t_end, a.samples)
    };
    let series = evolution_series(&psi0, &prop, &times)?;
    if series.max_top_shell > ctx.tolerances.top_shell {
        return Err(CliError::convergence(format!(
            "top-shell weight {:.3e} exceeds {:.1e} at nmax = {nmax}; raise --nmax",
            series.max_top_shell, ctx.tolerances.top_shell
        )));
    }
    let classical = if a.check_classical {
        Some(sample_trajectory(&psi0.centroid(), &p.config(), &times)?.states)
    } else {
        None
    };

    let mut header = vec!["t_ms"];
    if a.observables.excitation {
        header.push("mean_excitation");
    }
    if a.observables.survival {
        header.push("survival");
    }
    if classical.is_some() {
        header.extend(["q1", "q2", "p1", "p2", "q1_classical", "q2_classical", "p1_classical", "p2_classical"]);
    }
    let mut body = header.join(",") + "\n";
    let mut ehrenfest = 0.0f64;
    for k in 0..times.len() {
        let mut row = vec![times[k]];
        if a.observables.excitation {
            row.push(series.mean_excitation[k]);
        }
        if a.observables.survival {
            row.push(series.survival[k]);
        }
        if let Some(cl) = &classical {
            let (q, c) = (series.centroid[k], cl[k]);
            ehrenfest = ehrenfest.max((q - c).norm());
            row.extend([q.q1, q.q2, q.p1, q.p2, c.q1, c.q2, c.p1, c.p2]);
        }
        body.push_str(&csv_row(&row));
        body.push('\n');
    }

    let last = times.len() - 1;
    println!("state {label}, nmax {nmax}, {} samples over [0, {t_end}] ms (T = {} ms)", times.len(), p.duration);
    println!(
        "<N(t_end)> - <N(0)> = {:.3e}",
        series.mean_excitation[last] - series.mean_excitation[0]
    );
    println!("1 - P(t_end) = {:.3e}", 1.0 - series.survival[last]);
    if t_end == p.duration {
        match revival_phase(&psi0, &p, nmax) {
            Ok(ph) => println!(
                "revival phase {:+.6}{:+.6}i (expected {:+}), after zero-point removal {:+.6}{:+.6}i",
                ph.full.re, ph.full.im, ph.expected_sign, ph.dynamical.re, ph.dynamical.im
            ),
            Err(e) => println!("revival phase undefined: {e}"),
        }
    }
    if classical.is_some() {
        println!("max |<v>(t) - v_classical(t)| = {ehrenfest:.3e}");
    }
    out.csv(format!("simulate_{}.csv", state_kind(&a.state)), body);
    finish(out, &out_dir(&a.out))
}

/// Phase-space point at the centroid of coherent amplitudes.
fn centroid(a1: Complex<f64>, a2: Complex<f64>) -> PhaseSpaceState<f64> {
    let r = 2f64.sqrt();
    PhaseSpaceState::new(r * a1.re, r * a2.re, r * a1.im, r * a2.im)
}

pub fn classical(a: &ClassicalArgs, ctx: &Context) -> Result<(), CliError> {
    let p = design_from(&a.protocol)?;
    if a.samples < 2 {
        return Err(CliError::usage("--samples must be at least 2"));
    }
    let mut v0 = PhaseSpaceState::new(a.q1, a.q2, a.p1, a.p2);
    if let Some(al) = a.alpha1 {
        let c = centroid(al, Complex::new(0.0, 0.0));
        (v0.q1, v0.p1) = (c.q1, c.p1);
    }
    if let Some(al) = a.alpha2 {
        let c = centroid(Complex::new(0.0, 0.0), al);
        (v0.q2, v0.p2) = (c.q2, c.p2);
    }
    if !v0.is_finite() {
        return Err(CliError::usage("initial state must be finite"));
    }
    let c = p.config();
    let flow = RotatingFlow::new(&c)?;
    let times = uniform_grid(p.duration, a.samples);
    let mut traj = sample_trajectory(&v0, &c, &times)?;
    let end = flow.at(&v0, p.duration);
    let closure = (end - v0).norm() / (1.0 + v0.norm());
    let lab = (lab_frame_state(&end, c.theta_dot() * p.duration) - lab_frame_state(&v0, p.theta_f)).norm()
        / (1.0 + v0.norm());
    if a.frame != Frame::Rotating {
        traj = traj.to_frame(a.frame, &flow)?;
    }
    let mut body = Vec::new();
    traj.write_csv(&mut body).expect("writing to memory");
    println!("T = {} ms, {} samples, frame {}", p.duration, traj.len(), a.frame.tag());
    println!("closed-orbit residual |v(T) - v(0)| / (1 + |v(0)|) = {closure:.3e}");
    println!("lab-frame residual against the theta_f-rotated start = {lab:.3e}");

    let mut out = RunOutput::new("classical", &ctx.args, &ctx.tolerances);
    protocol_params(&mut out, &p);
    out.param("initial_state", vec![v0.q1, v0.q2, v0.p1, v0.p2]);
    out.param("frame", a.frame.tag());
    out.param("samples", a.samples);
    out.csv(traj.file_name(), String::from_utf8(body).expect("ASCII output"));
    finish(out, &out_dir(&a.out))
}

pub fn track(a: &TrackArgs, ctx: &Context) -> Result<(), CliError> {
    let p = design_from(&a.protocol)?;
    let mean = a.alpha1.norm_sqr() + a.alpha2.norm_sqr();
    let nmax = match a.nmax {
        Some(n) => n,
        None => {
            let policy = initial_nmax(mean);
            if policy > ctx.tolerances.max_nmax {
                eprintln!(
                    "note: starting truncation {policy} exceeds max_nmax = {}; using {} (the top-shell check still applies)",
                    ctx.tolerances.max_nmax, ctx.tolerances.max_nmax
                );
            }
            policy.min(ctx.tolerances.max_nmax)
        }
    };
    let psi0 = QuantumState::coherent(a.alpha1, a.alpha2, nmax)?;
    let c = p.config();
    let v0 = psi0.centroid();
    let orbit = sample_trajectory(&v0, &c, &uniform_grid(p.duration, 1001))?;
    let mut grid = GridSpec::around(&orbit.states, a.margin, a.spacing);
    grid.time_steps = a.time_steps;
    grid.top_shell_tolerance = ctx.tolerances.top_shell;
    let tg = wavepacket_track(&psi0, &p, &grid)?;

    let mut body = Vec::new();
    tg.write_csv(&mut body).expect("writing to memory");
    let mut orbit_body = Vec::new();
    orbit.write_csv(&mut orbit_body).expect("writing to memory");
    let (qa, qb) = tg.argmax();
    println!(
        "nmax {nmax}, grid {}x{}, {} time steps",
        tg.q1_axis.len(),
        tg.q2_axis.len(),
        tg.time_steps
    );
    println!(
        "integral {:.6} vs T = {:.6} ms (relative {:.2e}); half-step change {:.2e}; max top shell {:.2e}; maximum at ({qa:.3}, {qb:.3})",
        tg.integral(),
        p.duration,
        ((tg.integral() - p.duration) / p.duration).abs(),
        tg.quadrature_change,
        tg.max_top_shell
    );

    let mut out = RunOutput::new("track", &ctx.args, &ctx.tolerances);
    protocol_params(&mut out, &p);
    out.param("alpha1", vec![a.alpha1.re, a.alpha1.im]);
    out.param("alpha2", vec![a.alpha2.re, a.alpha2.im]);
    out.param("nmax", nmax);
    out.param("spacing", a.spacing);
    out.param("margin", a.margin);
    out.param("time_steps", a.time_steps);
    out.param("quadrature_change", tg.quadrature_change);
    out.param("max_top_shell", tg.max_top_shell);
    out.csv("track.csv", String::from_utf8(body).expect("ASCII output"));
    out.csv(orbit.file_name(), String::from_utf8(orbit_body).expect("ASCII output"));
    finish(out, &out_dir(&a.out))
}

pub fn stability(a: &StabilityArgs, ctx: &Context) -> Result<(), CliError> {
    if a.points < 3 {
        return Err(CliError::usage("--points must be at least 3 for a quadratic fit"));
    }
    if !(a.eps_range > 0.0) {
        return Err(CliError::usage("--eps-range must be positive"));
    }
    if a.n2_list.is_empty() {
        return Err(CliError::usage("--n2-list is empty"));
    }
    let w1 = angular(a.omega1_khz, a.omega1_rad).unwrap_or(2.0 * PI);
    let label = a.state.label();
    let mut out = RunOutput::new("stability", &ctx.args, &ctx.tolerances);
    out.param("omega1_rad_per_ms", w1);
    out.param("theta_f", a.theta_f);
    out.param("n1", a.n1);
    out.param("n2_list", a.n2_list.clone());
    out.param("eps_range", a.eps_range);
    out.param("points", a.points);
    out.param("state", label.clone());

    let mut curvatures = Vec::new();
    println!("{:>4} {:>6} {:>14} {:>14} {:>10}", "n2", "nmax", "curvature", "expected", "rel.err");
    for &n2 in &a.n2_list {
        let p = design_protocol(w1, a.theta_f, a.n1, n2)?;
        let nmax = settle_truncation(&a.state, &p, a.nmax, ctx, &mut out, &format!("{label} n2={n2}"))?;
        let psi0 = a.state.build(nmax)?;
        let eps = symmetric_offsets(p.duration, a.eps_range, a.points);
        let report = stability_report(&psi0, &p, &eps)?;
        // The closed form applies to the ground state; otherwise the
        // energy variance of the state itself is the prediction.
        let expected = match a.state {
            StateSpec::Ground => ground_state_variance(p.omega1, p.omega2, p.theta_dot).delta_h_sq,
            _ => report.energy_variance,
        };
        let curvature = report.fit.curvature();
        println!(
            "{n2:>4} {nmax:>6} {curvature:>14.6e} {expected:>14.6e} {:>10.3e}",
            ((curvature - expected) / expected).abs()
        );
        curvatures.push(curvature);
        let mut body = String::from("eps_ms,survival\n");
        for (e, v) in report.series.times.iter().zip(&report.series.values) {
            body.push_str(&csv_row(&[*e, *v]));
            body.push('\n');
        }
        out.csv(format!("stability_n2_{n2}.csv"), body);
    }
    if curvatures.len() > 1 {
        let narrowing = curvatures.windows(2).all(|w| w[1] > w[0]);
        println!("curves narrow with each listed n2: {narrowing}");
    }
    println!("curvature in (rad/ms)^2; divide by (2 pi)^2 for (2 pi kHz)^2");
    finish(out, &out_dir(&a.out))
}
