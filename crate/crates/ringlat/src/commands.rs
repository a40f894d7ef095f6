//! One function per scenario command. Each reads its parameters, calls the
//! core library and returns tables.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ringlat_core::band::{self, build_wannier, solve_bloch, tunneling_element, ContinuumProblem, Potential};
use ringlat_core::ed::{ed_hetero_oracle, ed_oracle, EdSpectrum, MAX_SITES};
use ringlat_core::hetero::{self, hetero_momentum_density, solve_hetero_spectrum, HeteroParams, HeteroSweep, Species};
use ringlat_core::lattice::{RingLattice, RotationSpec, TotalMomentum};
use ringlat_core::one::{self, HubbardParams, OneParticleState};
use ringlat_core::quad::integrate_adaptive;
use ringlat_core::ramp::{PhaseProfile, RampSchedule};
use ringlat_core::two::{self, DimerState};

use crate::config::{Command, ConfigError, Params};
use crate::table::{Kind, Schema, Table};
use crate::RunError;

/// Tables produced by a command. `failure` is set when the command ran to
/// completion but its own verdict is negative.
#[derive(Debug, Default)]
pub struct Report {
    pub outputs: Vec<(String, Table)>,
    pub failure: Option<String>,
}

impl Report {
    fn add(&mut self, suffix: impl Into<String>, table: Table) {
        self.outputs.push((suffix.into(), table));
    }
}

fn num<E: std::fmt::Display>(e: E) -> RunError {
    RunError::Numerical(e.to_string())
}

fn push(t: &mut Table, row: Vec<crate::table::Cell>) -> Result<(), RunError> {
    t.push(row).map_err(|e| RunError::Numerical(format!("internal schema error: {e}")))
}

pub fn run(command: Command, p: &Params, base: &Path) -> Result<Report, RunError> {
    let report = match command {
        Command::Band => band_cmd(p, base)?,
        Command::Wannier => wannier_cmd(p, base)?,
        Command::SpectrumSweep => spectrum_sweep(p)?,
        Command::GroundState => ground_state(p)?,
        Command::Wavepacket => wavepacket(p)?,
        Command::DimerSolve => dimer_solve(p)?,
        Command::DimerDensity => dimer_density(p)?,
        Command::DimerRamp => dimer_ramp(p)?,
        Command::HeteroSolve => hetero_solve(p)?,
        Command::HeteroDensity => hetero_density(p)?,
        Command::OracleCheck => oracle_check(p)?,
    };
    Ok(report)
}

// ---- shared parameter readers ----

fn sites(p: &Params, key: &str) -> Result<usize, ConfigError> {
    let n = p.usize(key)?;
    if n < 2 {
        return Err(p.invalid(key, "need at least 2 sites"));
    }
    Ok(n)
}

fn positive(p: &Params, key: &str, default: f64) -> Result<f64, ConfigError> {
    let x = p.f64_or(key, default)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(p.invalid(key, "must be positive"))
    }
}

/// `P_steps` (integer `k` in `P = 2πk/N`) or `P` (an angle on that grid).
fn total_momentum(p: &Params, n: usize) -> Result<Option<TotalMomentum>, ConfigError> {
    match (p.opt_i64("P_steps")?, p.opt_angle("P")?) {
        (Some(_), Some(_)) => Err(p.invalid("P", "give either P or P_steps, not both")),
        (Some(k), None) => Ok(Some(TotalMomentum::new(k, n))),
        (None, Some(v)) => TotalMomentum::from_value(v, n)
            .map(Some)
            .map_err(|_| p.invalid("P", format!("must be a multiple of 2π/{n}"))),
        (None, None) => Ok(None),
    }
}

fn rotation(p: &Params, lattice: &RingLattice, mass: f64) -> Result<RotationSpec, ConfigError> {
    let given: Vec<&str> = ["phi", "v", "Phi"].into_iter().filter(|k| p.has(k)).collect();
    let spec = match given.as_slice() {
        [] => RotationSpec::stationary(mass, lattice),
        ["phi"] => RotationSpec::from_phase(p.angle("phi")?, mass, lattice),
        ["v"] => RotationSpec::from_velocity(p.f64("v")?, mass, lattice),
        ["Phi"] => RotationSpec::from_twist(p.angle("Phi")?, mass, lattice),
        _ => return Err(p.invalid(given[1], "give only one of phi, v, Phi")),
    };
    spec.map_err(|e| p.invalid("m", e.to_string()))
}

fn ramp(p: &Params) -> Result<RampSchedule, ConfigError> {
    let duration = p.f64("duration")?;
    let step = p.f64("step")?;
    let r = p.table("ramp")?;
    let profile = match r.str("shape")? {
        "constant" => PhaseProfile::Constant(r.angle("phi")?),
        shape @ ("linear" | "cosine") => {
            let start = r.angle("start")?;
            let end = r.angle("end")?;
            let ramp_time = r.f64_or("ramp_time", duration)?;
            if shape == "linear" {
                PhaseProfile::Linear { start, end, ramp_time }
            } else {
                PhaseProfile::Cosine { start, end, ramp_time }
            }
        }
        "piecewise" => {
            let knots = r.table("knots")?;
            let t = knots.f64_list("t")?;
            let phi = knots.angle_list("phi")?;
            knots.finish()?;
            if t.len() != phi.len() {
                return Err(knots.invalid("phi", "needs one value per entry of t"));
            }
            PhaseProfile::Piecewise(t.into_iter().zip(phi).collect())
        }
        other => return Err(r.invalid("shape", format!("unknown shape `{other}` (constant, linear, cosine, piecewise)"))),
    };
    r.finish()?;
    RampSchedule::new(profile, duration, step).map_err(|e| p.invalid("ramp", e.to_string()))
}

fn ramp_end_time(ramp: &RampSchedule) -> f64 {
    ramp.profile().breakpoints().into_iter().fold(0.0, f64::max).min(ramp.duration())
}

fn continuum_problem(p: &Params, base: &Path) -> Result<ContinuumProblem, RunError> {
    let n = sites(p, "N")?;
    let spacing = positive(p, "a", 1.0)?;
    let mass = positive(p, "m", 1.0)?;
    let lattice = RingLattice::new(n, spacing).map_err(|e| p.invalid("a", e.to_string()))?;
    let rotation = rotation(p, &lattice, mass)?;
    let cutoff = p.usize_or("cutoff", 16)?;
    let potential = match (p.opt_f64("depth")?, p.opt_str("potential_table")?) {
        (Some(depth), None) => Potential::sinusoidal(depth * band::recoil_energy(mass, spacing)),
        (None, Some(file)) => {
            let path = base.join(file);
            let f = std::fs::File::open(&path).map_err(|source| RunError::Io { path: path.clone(), source })?;
            let points = crate::table::read_potential_table(std::io::BufReader::new(f))
                .map_err(|e| p.invalid("potential_table", e.to_string()))?;
            Potential::from_table(&points, spacing).map_err(|e| p.invalid("potential_table", e.to_string()))?
        }
        (Some(_), Some(_)) => return Err(p.invalid("depth", "give either depth or potential_table").into()),
        (None, None) => return Err(ConfigError::Missing("depth".into()).into()),
    };
    let mut problem = ContinuumProblem::new(lattice, rotation, potential, cutoff).map_err(|e| p.invalid("cutoff", e.to_string()))?;
    if let Some(w) = p.opt_f64("cutoff_weight")? {
        problem.cutoff_weight = w;
    }
    Ok(problem)
}

fn band_meta(t: &mut Table, problem: &ContinuumProblem) {
    t.meta("recoil_energy", problem.recoil_energy());
    t.meta("energy_offset", format!("{:.16e} (−k_v²/2m, dropped from every energy)", problem.frame_offset()));
    t.meta("phase", problem.rotation.phase());
}

// ---- band-solver ----

fn band_cmd(p: &Params, base: &Path) -> Result<Report, RunError> {
    let problem = continuum_problem(p, base)?;
    let bands = p.usize_or("bands", 3)?.clamp(1, 2 * problem.cutoff + 1);
    let sol = solve_bloch(&problem).map_err(num)?;
    let er = problem.recoil_energy();
    let mut t = Table::new(Schema::new([
        ("n", Kind::Int),
        ("k_lab", Kind::Float),
        ("K", Kind::Float),
        ("band", Kind::Int),
        ("energy", Kind::Float),
        ("energy_over_er", Kind::Float),
    ]));
    for k in sol.momenta() {
        for b in 0..bands {
            let e = k.energies[b];
            push(&mut t, vec![k.index.into(), k.lab.into(), k.shifted.into(), b.into(), e.into(), (e / er).into()])?;
        }
    }
    band_meta(&mut t, &problem);
    t.meta("bandwidth", sol.bandwidth());
    t.meta("band_gap", sol.band_gap());
    t.meta("twist_residual", sol.twist_residual(16));
    let mut r = Report::default();
    r.add("", t);
    Ok(r)
}

fn wannier_cmd(p: &Params, base: &Path) -> Result<Report, RunError> {
    let problem = continuum_problem(p, base)?;
    let samples = p.usize_or("samples_per_period", 32)?.max(2);
    let sol = solve_bloch(&problem).map_err(num)?;
    let w = build_wannier(&sol).map_err(num)?;
    let j = tunneling_element(&w).map_err(num)?;
    let lattice = problem.lattice;
    let total = samples * lattice.sites();
    let dx = lattice.circumference() / total as f64;
    let mut shape = Table::new(Schema::floats(["x", "w_re", "w_im", "w_abs2", "w_truncated_abs2"]));
    for i in 0..total {
        let x = -0.5 * lattice.circumference() + i as f64 * dx;
        let z = w.w0(x);
        push(&mut shape, vec![x.into(), z.re.into(), z.im.into(), z.norm_sqr().into(), w.w0_truncated(x).norm_sqr().into()])?;
    }
    band_meta(&mut shape, &problem);
    let cols = [
        "j_re",
        "j_im",
        "j_magnitude",
        "j_phase",
        "j_stationary",
        "j_relative_shift",
        "j_truncated_re",
        "j_truncated_im",
        "j_harmonic",
        "bandwidth",
        "gram_deviation",
        "sum_rule_deviation",
        "central_fraction",
        "localization_offset",
        "twist_residual",
    ];
    let mut summary = Table::new(Schema::floats(cols));
    let pts = 4 * (problem.cutoff + 1);
    let sum_rule = w.sum_rule(pts).into_iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
    push(
        &mut summary,
        vec![
            j.complex.re.into(),
            j.complex.im.into(),
            j.magnitude.into(),
            j.phase.into(),
            j.stationary_magnitude.into(),
            j.magnitude_shift.into(),
            j.truncated.re.into(),
            j.truncated.im.into(),
            j.harmonic.into(),
            sol.bandwidth().into(),
            w.gram_deviation().into(),
            sum_rule.into(),
            w.central_fraction(pts).into(),
            w.localization_offset(pts).into(),
            sol.twist_residual(16).into(),
        ],
    )?;
    band_meta(&mut summary, &problem);
    summary.meta("quadrature_points_per_period", j.points_per_period);
    summary.meta("j_truncated_note", "W cut to [−L/2, L/2); boundary terms of the cut are dropped");
    summary.meta("j_harmonic_note", "ω·exp(−mωa²) with ω from the curvature of V at its minimum");
    let mut r = Report::default();
    r.add("", shape);
    r.add("tunneling", summary);
    Ok(r)
}

// ---- hubbard-one ----

fn spectrum_sweep(p: &Params) -> Result<Report, RunError> {
    let ns = p.usize_list("N")?;
    if let Some(&bad) = ns.iter().find(|&&n| n < 2) {
        return Err(p.invalid("N", format!("need at least 2 sites, got {bad}")).into());
    }
    let j = p.f64("J")?;
    let lo = p.angle_or("phi_min", -PI)?;
    let hi = p.angle_or("phi_max", PI)?;
    let points = p.usize_or("points", 401)?;
    if points < 2 {
        return Err(p.invalid("points", "need at least 2").into());
    }
    let mut report = Report::default();
    for n in ns {
        let sweep: Vec<Result<Vec<Vec<crate::table::Cell>>, RunError>> = (0..points)
            .into_par_iter()
            .map(|i| {
                let phi = lo + (hi - lo) * i as f64 / (points - 1) as f64;
                let params = HubbardParams::new(n, j, phi, 0.0).map_err(num)?;
                let ground = one::ground_state_set(&params, one::default_degeneracy_tol(&params));
                Ok(one::dispersion_spectrum(&params)
                    .into_iter()
                    .map(|(q, e)| {
                        vec![
                            phi.into(),
                            (phi / TAU).into(),
                            q.index().unwrap_or_default().into(),
                            q.value().into(),
                            e.into(),
                            (e / j).into(),
                            ground.momenta.contains(&q).into(),
                        ]
                    })
                    .collect())
            })
            .collect();
        let mut t = Table::new(Schema::new([
            ("phi", Kind::Float),
            ("phi_over_2pi", Kind::Float),
            ("n", Kind::Int),
            ("q", Kind::Float),
            ("omega", Kind::Float),
            ("omega_over_j", Kind::Float),
            ("ground", Kind::Int),
        ]));
        for rows in sweep {
            for row in rows? {
                push(&mut t, row)?;
            }
        }
        t.meta("N", n);
        report.add(format!("N{n}"), t);
    }
    Ok(report)
}

fn ground_state(p: &Params) -> Result<Report, RunError> {
    let n = sites(p, "N")?;
    let params = HubbardParams::new(n, p.f64("J")?, p.angle("phi")?, 0.0).map_err(num)?;
    let spacing = positive(p, "a", 1.0)?;
    let tol = p.f64_or("tol", one::default_degeneracy_tol(&params))?;
    let g = one::ground_state_set(&params, tol);
    let mut t = Table::new(Schema::new([
        ("n", Kind::Int),
        ("q", Kind::Float),
        ("lab_momentum", Kind::Float),
        ("energy", Kind::Float),
        ("degeneracy", Kind::Int),
        ("group_velocity", Kind::Float),
    ]));
    for q in &g.momenta {
        let v = one::group_velocity(q.value(), &params, spacing).map_err(num)?;
        push(
            &mut t,
            vec![
                q.index().unwrap_or_default().into(),
                q.value().into(),
                (q.value() / spacing).into(),
                g.energy.into(),
                g.momenta.len().into(),
                v.into(),
            ],
        )?;
    }
    t.meta("lab_momentum_note", "ħq/a in the lab frame");
    let mut r = Report::default();
    r.add("", t);
    Ok(r)
}

fn wavepacket(p: &Params) -> Result<Report, RunError> {
    let n = sites(p, "N")?;
    let j = p.f64("J")?;
    let spacing = positive(p, "a", 1.0)?;
    let width = positive(p, "width", 1.0)?;
    let center = p.f64_or("center", 0.5 * n as f64)?;
    let q0 = p.angle_or("q0", 0.0)?;
    let interval = positive(p, "sample_interval", 1.0)?;
    let schedule = ramp(p)?;
    let fit_start = p.f64_or("fit_start", ramp_end_time(&schedule))?;
    let params = HubbardParams::new(n, j, schedule.phase(0.0), 0.0).map_err(num)?;
    let psi = OneParticleState::gaussian_packet(n, center, width, q0).map_err(num)?;

    let count = (schedule.duration() / interval).floor() as usize;
    let mut times: Vec<f64> = (0..=count).map(|i| i as f64 * interval).collect();
    if schedule.duration() - times[count] > 1e-12 * schedule.duration().max(1.0) {
        times.push(schedule.duration());
    }
    let traj = one::evolve_one_particle(&psi, &params, &schedule, &times).map_err(num)?;
    let start = one::momentum_distribution(&psi).map_err(num)?;
    let centroids: Vec<f64> = traj.states.iter().map(one::centroid).collect();
    let unwrapped = one::unwrap_positions(&centroids, n);

    let mut trace = Table::new(Schema::floats(["t", "phi", "centroid", "width", "population_change"]));
    for (i, s) in traj.states.iter().enumerate() {
        let d = one::momentum_distribution(s).map_err(num)?;
        let change = start.iter().zip(&d).map(|(a, b)| (a.1 - b.1).abs()).fold(0.0, f64::max);
        push(
            &mut trace,
            vec![
                times[i].into(),
                schedule.phase(times[i]).into(),
                (unwrapped[i] * spacing).into(),
                (one::rms_width(s) * spacing).into(),
                change.into(),
            ],
        )?;
    }
    let from = times.iter().position(|&t| t >= fit_start - 1e-12).unwrap_or(times.len());
    if times.len() - from < 2 {
        return Err(p.invalid("fit_start", "leaves fewer than two samples to fit").into());
    }
    let fitted = one::fit_slope(&times[from..], &unwrapped[from..]) * spacing;
    let end_params = params.with_phase(schedule.phase(schedule.duration()));
    let predicted = one::group_velocity(q0, &end_params, spacing).map_err(num)?;
    let mut fit = Table::new(Schema::new([
        ("fit_start", Kind::Float),
        ("fitted_velocity", Kind::Float),
        ("group_velocity", Kind::Float),
        ("relative_deviation", Kind::Float),
        ("max_rate", Kind::Float),
        ("fast_ramp", Kind::Int),
    ]));
    push(
        &mut fit,
        vec![
            fit_start.into(),
            fitted.into(),
            predicted.into(),
            (fitted / predicted - 1.0).into(),
            schedule.max_rate().into(),
            (!traj.warnings.is_empty()).into(),
        ],
    )?;
    fit.meta("estimator", "least-squares slope of the unwrapped circular-mean centroid");
    for w in &traj.warnings {
        fit.meta("warning", format!("{w:?}"));
    }
    let end = one::momentum_distribution(traj.states.last().expect("at least one sample")).map_err(num)?;
    let mut pops = Table::new(Schema::new([("n", Kind::Int), ("q", Kind::Float), ("p_initial", Kind::Float), ("p_final", Kind::Float)]));
    for (a, b) in start.iter().zip(&end) {
        push(&mut pops, vec![a.0.index().unwrap_or_default().into(), a.0.value().into(), a.1.into(), b.1.into()])?;
    }
    let mut r = Report::default();
    r.add("", trace);
    r.add("fit", fit);
    r.add("momentum", pops);
    Ok(r)
}

// ---- hubbard-two ----

fn dimer_rows(t: &mut Table, states: &[DimerState]) -> Result<(), RunError> {
    for (level, s) in states.iter().enumerate() {
        let sector = s.sector();
        push(
            t,
            vec![
                sector.total().steps().into(),
                sector.total().value().into(),
                level.into(),
                sector.omega().into(),
                sector.coupling().into(),
                s.energy().into(),
                s.omega().unwrap_or(0.0).into(),
                sector.is_collapsed().into(),
                s.is_bound().into(),
                s.near_pole().into(),
            ],
        )?;
    }
    Ok(())
}

fn dimer_schema() -> Schema {
    Schema::new([
        ("P_steps", Kind::Int),
        ("P", Kind::Float),
        ("level", Kind::Int),
        ("omega_scale", Kind::Float),
        ("coupling", Kind::Float),
        ("energy", Kind::Float),
        ("w", Kind::Float),
        ("collapsed", Kind::Int),
        ("bound", Kind::Int),
        ("near_pole", Kind::Int),
    ])
}

fn sectors(n: usize, chosen: Option<TotalMomentum>) -> Vec<TotalMomentum> {
    match chosen {
        Some(p) => vec![p],
        None => TotalMomentum::all(n).collect(),
    }
}

fn dimer_solve(p: &Params) -> Result<Report, RunError> {
    let n = sites(p, "N")?;
    let (j, u, phi) = (p.f64("J")?, p.f64("U")?, p.angle("phi")?);
    let chosen = total_momentum(p, n)?;
    let want_amps = p.bool_or("amplitudes", false)?;
    let spectra: Vec<Result<Vec<DimerState>, RunError>> = sectors(n, chosen)
        .into_par_iter()
        .map(|total| two::solve_dimer_spectrum(n, total, phi, j, u).map_err(num))
        .collect();
    let mut t = Table::new(dimer_schema());
    let mut amps = Table::new(Schema::new([
        ("P_steps", Kind::Int),
        ("level", Kind::Int),
        ("q", Kind::Float),
        ("a_re", Kind::Float),
        ("a_im", Kind::Float),
    ]));
    for spectrum in spectra {
        let spectrum = spectrum?;
        dimer_rows(&mut t, &spectrum)?;
        if want_amps {
            for (level, s) in spectrum.iter().enumerate() {
                for (q, a) in s.sector().grid().iter().zip(s.amplitudes()) {
                    push(&mut amps, vec![s.sector().total().steps().into(), level.into(), q.value().into(), a.re.into(), a.im.into()])?;
                }
            }
        }
    }
    t.meta("w_note", "E/Ω; 0 with collapsed = 1 when Ω vanishes");
    let mut r = Report::default();
    r.add("", t);
    if want_amps {
        amps.meta("normalization", "2·Σ|A(q)|² = 1");
        r.add("amplitudes", amps);
    }
    Ok(r)
}

fn dimer_density(p: &Params) -> Result<Report, RunError> {
    let n = sites(p, "N")?;
    let (j, u, phi) = (p.f64("J")?, p.f64("U")?, p.angle("phi")?);
    let total = total_momentum(p, n)?.unwrap_or(TotalMomentum::new(0, n));
    let points = p.usize_or("points", 512)?.max(2);
    if u == 0.0 {
        return Err(p.invalid("U", "the density closed form needs U ≠ 0").into());
    }
    let spectrum = two::solve_dimer_spectrum(n, total, phi, j, u).map_err(num)?;
    let bound = two::bound_state(&spectrum);
    let probs = two::momentum_probabilities_finite_n(bound).map_err(num)?;
    let pv = total.value();
    let f = |q: f64| two::momentum_density_large_n(q, pv, phi, j, u);
    let mut finite = Table::new(Schema::new([
        ("n", Kind::Int),
        ("q", Kind::Float),
        ("probability", Kind::Float),
        ("scaled", Kind::Float),
        ("closed_form", Kind::Float),
    ]));
    for (k, prob) in &probs {
        push(
            &mut finite,
            vec![
                k.index().unwrap_or_default().into(),
                k.value().into(),
                (*prob).into(),
                (prob * n as f64 / TAU).into(),
                f(k.value()).map_err(num)?.into(),
            ],
        )?;
    }
    let mut curve = Table::new(Schema::floats(["q", "f"]));
    for i in 0..points {
        let q = -PI + TAU * i as f64 / points as f64;
        push(&mut curve, vec![q.into(), f(q).map_err(num)?.into()])?;
    }
    let sector = bound.sector();
    let omega = sector.omega();
    for t in [&mut finite, &mut curve] {
        t.meta("coupling", sector.coupling());
        t.meta("bound_energy", bound.energy());
        t.meta("bound_energy_large_n", two::bound_energy_large_n(omega, u).map_err(num)?);
    }
    if bound.is_bound() {
        let k = sector.coupling();
        finite.meta("rms_size", two::rms_size(bound).map_err(num)?);
        finite.meta("rms_size_large_n", 1.0 / (2f64.sqrt() * k.abs()));
        finite.meta("rms_size_quoted", 2f64.sqrt() / (k * k));
    }
    let integral = integrate_adaptive(|q| f(q).unwrap_or(f64::NAN), -PI, PI, 1e-12).map_err(num)?;
    curve.meta("integral", integral);
    let mut r = Report::default();
    r.add("", finite);
    r.add("curve", curve);
    Ok(r)
}

fn dimer_ramp(p: &Params) -> Result<Report, RunError> {
    let n = sites(p, "N")?;
    let (j, u) = (p.f64("J")?, p.f64("U")?);
    let total = total_momentum(p, n)?.unwrap_or(TotalMomentum::new(0, n));
    let every = p.usize_or("sample_every", 100)?;
    let schedule = ramp(p)?;
    let spectrum = two::solve_dimer_spectrum(n, total, schedule.phase(0.0), j, u).map_err(num)?;
    let start = two::bound_state(&spectrum).clone();
    let out = two::evolve_dimer_ramp(&start, &schedule, every).map_err(num)?;
    let mut trace = Table::new(Schema::new([
        ("t", Kind::Float),
        ("phi", Kind::Float),
        ("omega_scale", Kind::Float),
        ("fidelity", Kind::Float),
        ("delta_n", Kind::Float),
        ("peak_q", Kind::Float),
        ("norm_drift", Kind::Float),
    ]));
    for s in &out.trace {
        push(
            &mut trace,
            vec![
                s.time.into(),
                s.phase.into(),
                s.omega.into(),
                s.fidelity.into(),
                s.rms_size.into(),
                s.peak.value().into(),
                s.norm_drift.into(),
            ],
        )?;
    }
    let min_fidelity = out.trace.iter().map(|s| s.fidelity).fold(1.0, f64::min);
    trace.meta("min_fidelity", min_fidelity);
    let before = two::momentum_probabilities_finite_n(&start).map_err(num)?;
    let after = two::pair_momentum_probabilities(out.final_state.sector(), out.final_state.amplitudes());
    let mut pops = Table::new(Schema::new([("n", Kind::Int), ("q", Kind::Float), ("p_initial", Kind::Float), ("p_final", Kind::Float)]));
    for (a, b) in before.iter().zip(&after) {
        push(&mut pops, vec![a.0.index().unwrap_or_default().into(), a.0.value().into(), a.1.into(), b.1.into()])?;
    }
    let mut r = Report::default();
    r.add("", trace);
    r.add("momentum", pops);
    Ok(r)
}

// ---- hubbard-two-hetero ----

fn hetero_params(p: &Params, n: usize) -> Result<HeteroParams, RunError> {
    let js = (p.f64("J1")?, p.f64("J2")?);
    let phis = (p.angle("phi1")?, p.angle("phi2")?);
    HeteroParams::new(n, js, phis, p.f64("U12")?).map_err(|e| p.invalid("J1", e.to_string()).into())
}

fn hetero_solve(p: &Params) -> Result<Report, RunError> {
    let n = sites(p, "N")?;
    let params = hetero_params(p, n)?;
    let chosen = total_momentum(p, n)?;
    let list = sectors(n, chosen);
    let spectra: Vec<Result<Vec<hetero::HeteroState>, RunError>> = list
        .par_iter()
        .map(|&total| solve_hetero_spectrum(&params, total).map_err(num))
        .collect();
    let mut t = Table::new(Schema::new([
        ("P_steps", Kind::Int),
        ("P", Kind::Float),
        ("level", Kind::Int),
        ("omega_scale", Kind::Float),
        ("beta", Kind::Float),
        ("coupling", Kind::Float),
        ("energy", Kind::Float),
        ("near_pole", Kind::Int),
    ]));
    // β is reported on a continuous branch across the listed sectors
    let mut sweep = HeteroSweep::new();
    for (total, spectrum) in list.iter().zip(spectra) {
        let spectrum = spectrum?;
        let (omega, beta) = sweep.scales(&params, total.value()).map_err(num)?;
        for (level, s) in spectrum.iter().enumerate() {
            push(
                &mut t,
                vec![
                    total.steps().into(),
                    total.value().into(),
                    level.into(),
                    omega.into(),
                    beta.into(),
                    s.sector().coupling().into(),
                    s.energy().into(),
                    s.near_pole().into(),
                ],
            )?;
        }
    }
    t.meta("interaction_convention", "(U12/2)·n1·n2 per site; coupling = U12/(2Ω)");
    let mut r = Report::default();
    r.add("", t);
    Ok(r)
}

fn hetero_density(p: &Params) -> Result<Report, RunError> {
    // the closed form is an infinite-ring result; N only validates the inputs
    let params = hetero_params(p, 2)?;
    let total = p.angle_or("P", 0.0)?;
    let points = p.usize_or("points", 512)?.max(2);
    let mut t = Table::new(Schema::new([("q", Kind::Float), ("f1", Kind::Float), ("f2", Kind::Float), ("uniform_limit", Kind::Int)]));
    let mut peaks = [(f64::NEG_INFINITY, 0.0); 2];
    for i in 0..points {
        let q = -PI + TAU * i as f64 / points as f64;
        let a = hetero_momentum_density(q, &params, total, Species::One).map_err(num)?;
        let b = hetero_momentum_density(q, &params, total, Species::Two).map_err(num)?;
        for (slot, v) in peaks.iter_mut().zip([a.value, b.value]) {
            if v > slot.0 {
                *slot = (v, q);
            }
        }
        push(&mut t, vec![q.into(), a.value.into(), b.value.into(), a.uniform_limit.into()])?;
    }
    t.meta("peak_q1", peaks[0].1);
    t.meta("peak_q2", peaks[1].1);
    let mut r = Report::default();
    r.add("", t);
    Ok(r)
}

// ---- oracle ----

fn max_deviation(ed: &EdSpectrum, solve: impl Fn(TotalMomentum) -> Result<Vec<f64>, RunError>) -> Result<f64, RunError> {
    let mut worst = 0.0f64;
    for s in &ed.sectors {
        let got = solve(s.total)?;
        if got.len() != s.values.len() {
            return Ok(f64::INFINITY);
        }
        for (a, b) in got.iter().zip(&s.values) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

fn oracle_check(p: &Params) -> Result<Report, RunError> {
    let ns = if p.has("N") { p.usize_list("N")? } else { (3..=10).collect() };
    if let Some(&bad) = ns.iter().find(|&&n| !(2..=MAX_SITES).contains(&n)) {
        return Err(p.invalid("N", format!("{bad} is outside the dense oracle range 2..={MAX_SITES}")).into());
    }
    let draws = p.usize_or("draws", 100)?;
    let seed = p.usize_or("seed", 1)? as u64;
    let j_max = positive(p, "J_max", 2.0)?;
    let u_max = positive(p, "U_max", 6.0)?;
    let tol_factor = positive(p, "tolerance", 1e-9)?;
    let kinds = p.str_list_or("kinds", &["bosons", "hetero"])?;
    if let Some(k) = kinds.iter().find(|k| !matches!(k.as_str(), "bosons" | "hetero")) {
        return Err(p.invalid("kinds", format!("unknown kind `{k}` (bosons, hetero)")).into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Table::new(Schema::new([
        ("kind", Kind::Text),
        ("N", Kind::Int),
        ("draws", Kind::Int),
        ("max_deviation", Kind::Float),
        ("max_relative_deviation", Kind::Float),
        ("tolerance", Kind::Float),
        ("passed", Kind::Int),
    ]));
    let mut failed = Vec::new();
    for kind in &kinds {
        for &n in &ns {
            // draws are generated up front so the result does not depend on threads
            let cases: Vec<[f64; 6]> = (0..draws)
                .map(|_| {
                    [
                        rng.gen_range(-j_max..j_max),
                        rng.gen_range(-j_max..j_max),
                        rng.gen_range(-PI..PI),
                        rng.gen_range(-PI..PI),
                        rng.gen_range(-u_max..u_max),
                        0.0,
                    ]
                })
                .collect();
            let results: Vec<Result<(f64, f64), RunError>> = cases
                .par_iter()
                .map(|c| {
                    let [j1, j2, p1, p2, u, _] = *c;
                    if kind == "bosons" {
                        let ed = ed_oracle(n, p1, j1, u).map_err(num)?;
                        let dev = max_deviation(&ed, |tot| {
                            Ok(two::solve_dimer_spectrum(n, tot, p1, j1, u).map_err(num)?.iter().map(DimerState::energy).collect())
                        })?;
                        Ok((dev, j1.abs().max(u.abs())))
                    } else {
                        let params = HeteroParams::new(n, (j1, j2), (p1, p2), u).map_err(num)?;
                        let ed = ed_hetero_oracle(n, (j1, j2), (p1, p2), u).map_err(num)?;
                        let dev = max_deviation(&ed, |tot| {
                            Ok(solve_hetero_spectrum(&params, tot).map_err(num)?.iter().map(|s| s.energy()).collect())
                        })?;
                        Ok((dev, j1.abs().max(j2.abs()).max(u.abs())))
                    }
                })
                .collect();
            let (mut dev, mut rel) = (0.0f64, 0.0f64);
            for r in results {
                let (d, scale) = r?;
                dev = dev.max(d);
                rel = rel.max(d / scale);
            }
            let passed = rel < tol_factor;
            if !passed {
                failed.push(format!("{kind} N={n}: relative deviation {rel:e}"));
            }
            push(
                &mut t,
                vec![
                    kind.as_str().into(),
                    n.into(),
                    draws.into(),
                    dev.into(),
                    rel.into(),
                    tol_factor.into(),
                    passed.into(),
                ],
            )?;
        }
    }
    t.meta("seed", seed);
    t.meta("tolerance_note", "deviation / max(|J|, |U|) per draw");
    let mut r = Report::default();
    r.add("", t);
    if !failed.is_empty() {
        r.failure = Some(format!("oracle mismatch: {}", failed.join("; ")));
    }
    Ok(r)
}
