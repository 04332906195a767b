//! Command-line surface tying the solvers, the dynamics, and the stability
//! harness into reproducible experiments.
//!
//! Exit codes: 0 success, 1 runtime or check failure (one-line summary on
//! stderr/stdout), 2 usage errors.

use crate::config::{parse_config, CommandKind, ExperimentConfig};
use crate::error::{Error, Result};
use crate::euler::{evolve, Observer, StepControl};
use crate::field_io;
use crate::grid::Grid;
use crate::lane_emden::{
    derive_constants, diagnostics, maximize_energy_ball, principal_eigenpair, solve_for,
    solve_ground_state, steady_residual, LaneEmdenSolution, SolverOptions,
};
use crate::limits;
use crate::spectral::{divergence_coeffs, random_band_limited, SpectralField};
use crate::stability::{run_experiment, Perturbation};
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "vortexlab",
    version,
    about = "Steady vortices of the 2D Euler equation on the square: ground states, conservation audits, orbital-stability experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug, Default, Clone)]
struct Common {
    /// key=value config file; explicit flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Nonlinearity exponent
    #[arg(long)]
    p: Option<f64>,
    /// Interior grid resolution per axis
    #[arg(long)]
    n: Option<usize>,
    /// Solver tolerance
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    /// CFL number in (0, 1]
    #[arg(long)]
    cfl: Option<f64>,
    /// Horizon; defaults to the command's natural one
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Perturbation size
    #[arg(long)]
    delta: Option<f64>,
    /// L^s norm exponent (repeatable)
    #[arg(long = "s")]
    norm_s: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Perturbation kind: multiplicative | random-smooth | area-preserving
    #[arg(long)]
    pert: Option<String>,
    /// Rescale perturbed states into the invariant ball
    #[arg(long = "sp-constrain")]
    sp_constrain: bool,
    /// Output directory (default: $VORTEXLAB_OUT or ./out)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Solve the ground state; writes u.field, omega.field and constants.txt
    GroundState(Common),
    /// Maximize kinetic energy over the unit ball; cross-checks the
    /// constants against the ground-state route
    Maximize(Common),
    /// Free evolution with a conservation audit (CSV diagnostics)
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Initial vorticity from a field file instead of the steady state
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Perturb the steady state, evolve, and write the stability report
    Stability(Common),
    /// Principal-eigenpair diagnostics; checks the energy bound on the
    /// supplied fields
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Field files to check (repeatable)
        #[arg(long = "field")]
        fields: Vec<PathBuf>,
    },
    /// Run the identity and invariant suite; exit nonzero on any failure
    Verify(Common),
}

impl Common {
    fn resolve(&self, command: CommandKind) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                parse_config(&text)?
            }
            None => ExperimentConfig::default(),
        };
        cfg.command = Some(command);
        if let Some(p) = self.p {
            cfg.p = p;
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(tol) = self.tol {
            cfg.tol = tol;
        }
        if let Some(mi) = self.max_iter {
            cfg.max_iter = mi;
        }
        if let Some(cfl) = self.cfl {
            cfg.cfl = cfl;
        }
        if let Some(t) = self.t_end {
            cfg.t_end = Some(t);
        }
        if let Some(d) = self.delta {
            cfg.delta = d;
        }
        if !self.norm_s.is_empty() {
            cfg.norm_s = self.norm_s.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(pert) = &self.pert {
            cfg.pert_kind = pert.parse()?;
        }
        if self.sp_constrain {
            cfg.constrain_to_sp = true;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn solver_options(cfg: &ExperimentConfig) -> SolverOptions {
    SolverOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        ..SolverOptions::default()
    }
}

fn ensure_out(cfg: &ExperimentConfig) -> Result<()> {
    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))
}

fn stability_horizon(cfg: &ExperimentConfig, solution: &LaneEmdenSolution) -> f64 {
    // default horizon: 10 eddy-turnover times of the base state
    cfg.t_end.unwrap_or(10.0 * solution.eddy_time())
}

fn step_control(cfg: &ExperimentConfig, t_end: f64) -> StepControl {
    StepControl {
        cfl: cfg.cfl,
        t_end,
        ..StepControl::default()
    }
}

fn cmd_ground_state(cfg: &ExperimentConfig) -> Result<i32> {
    let grid = Grid::new(cfg.n)?;
    let sol = solve_for(cfg.p, grid, &solver_options(cfg))?;
    ensure_out(cfg)?;
    let echo = cfg.echo();
    field_io::write_field(&cfg.output_dir.join("u.field"), &sol.u)?;
    field_io::write_field(&cfg.output_dir.join("omega.field"), &sol.omega)?;
    field_io::write_constants(&cfg.output_dir.join("constants.txt"), &sol, &echo)?;
    let opt = |v: Option<f64>| v.map_or_else(|| "na".into(), |x| format!("{x:.12e}"));
    println!(
        "ground-state p={} n={} c_p={} mu_p={:.12e} M_p={} residual={:.3e} iterations={}",
        cfg.p,
        cfg.n,
        opt(sol.c_p),
        sol.mu_p,
        opt(sol.m_p),
        sol.residual,
        sol.iterations
    );
    Ok(0)
}

fn cmd_maximize(cfg: &ExperimentConfig) -> Result<i32> {
    let grid = Grid::new(cfg.n)?;
    let opts = solver_options(cfg);
    let (wstar, e1) = maximize_energy_ball(cfg.p, grid, &opts)?;
    ensure_out(cfg)?;
    field_io::write_field(&cfg.output_dir.join("wstar.field"), &wstar)?;
    if cfg.p > 1.0 {
        let sol = solve_ground_state(cfg.p, grid, &opts)?;
        let d = derive_constants(cfg.p, sol.c_p.expect("ground state has c_p"), e1)?;
        let spread = (d.mu_from_cp - d.mu_from_e1).abs() / d.mu_from_cp;
        println!(
            "maximize p={} n={} e1={e1:.12e} mu_from_cp={:.12e} mu_from_e1={:.12e} spread={spread:.3e} M_p={:.12e}",
            cfg.p, cfg.n, d.mu_from_cp, d.mu_from_e1, d.m_p
        );
    } else {
        println!("maximize p={} n={} e1={e1:.12e}", cfg.p, cfg.n);
    }
    Ok(0)
}

fn cmd_evolve(cfg: &ExperimentConfig, field: Option<&PathBuf>) -> Result<i32> {
    let omega0 = match field {
        Some(path) => field_io::read_field(path)?,
        None => {
            let grid = Grid::new(cfg.n)?;
            solve_for(cfg.p, grid, &solver_options(cfg))?.omega
        }
    };
    let t_end = cfg.t_end.unwrap_or(1.0);
    let ctrl = step_control(cfg, t_end);
    let mut observers = vec![Observer::Energy, Observer::EnergyDrift];
    for &s in &cfg.norm_s {
        observers.push(Observer::LsNorm(s));
        observers.push(Observer::LsNormDrift(s));
    }
    observers.push(Observer::RearrangementDrift);
    let traj = evolve(&omega0, &ctrl, &observers)?;
    ensure_out(cfg)?;
    field_io::write_trajectory(&cfg.output_dir.join("evolve.csv"), &traj, &cfg.echo())?;
    field_io::write_field(
        &cfg.output_dir.join("final.field"),
        &traj.final_state.omega.inverse(),
    )?;
    let last = traj.records.last().expect("at least the initial record");
    let mut summary = String::new();
    for (name, value) in traj.names.iter().zip(last.values.iter()) {
        if name.ends_with("drift") {
            let _ = write!(summary, " {name}={value:.3e}");
        }
    }
    println!(
        "evolve p={} n={} t_end={t_end:.6}{summary} steps_recorded={}",
        cfg.p,
        cfg.n,
        traj.records.len()
    );
    Ok(0)
}

fn cmd_stability(cfg: &ExperimentConfig) -> Result<i32> {
    let grid = Grid::new(cfg.n)?;
    let sol = solve_for(cfg.p, grid, &solver_options(cfg))?;
    let t_end = stability_horizon(cfg, &sol);
    let ctrl = step_control(cfg, t_end);
    let pert = Perturbation {
        kind: cfg.pert_kind,
        delta: cfg.delta,
        norm_s: cfg.norm_s[0],
        seed: cfg.seed,
        constrain_to_sp: cfg.constrain_to_sp,
    };
    let mut report = run_experiment(&sol, &pert, &ctrl, &cfg.norm_s)?;
    let mut echo = cfg.echo();
    echo["t_end"] = serde_json::json!(t_end);
    report.config = echo;
    ensure_out(cfg)?;
    let path = cfg.output_dir.join("report.csv");
    field_io::write_report(&path, &report)?;
    println!(
        "stability p={} n={} delta={} sup_dist_L{}={:.6e} sup_dist_E={:.6e} complete={} valid={} report={}",
        cfg.p,
        cfg.n,
        cfg.delta,
        cfg.norm_s[0],
        report.sup_dist_ls(0),
        report.sup_dist_e(),
        report.complete,
        report.valid,
        path.display()
    );
    Ok(0)
}

fn cmd_spectrum(cfg: &ExperimentConfig, fields: &[PathBuf]) -> Result<i32> {
    let grid = Grid::new(cfg.n)?;
    let (lambda1, phi1) = principal_eigenpair(grid);
    let eig_residual = steady_residual(&phi1, 1.0)?;
    let e_phi = SpectralField::forward(&phi1).energy();
    println!(
        "spectrum lambda1={lambda1} energy(phi1)={e_phi:.12e} eigen_residual={eig_residual:.3e}"
    );
    let mut failures = 0usize;
    for path in fields {
        let w = field_io::read_field(path)?;
        let norm = w.lp_norm(2.0)?;
        if norm == 0.0 {
            println!("field {}: zero field, bound trivially holds", path.display());
            continue;
        }
        // normalize into the unit L² ball, where 2λ₁E(w) ≤ 1 must hold
        let unit = w.scaled(1.0 / norm);
        let e = SpectralField::forward(&unit).energy();
        let bound = 2.0 * lambda1 * e;
        let ok = bound <= 1.0 + 1e-12;
        if !ok {
            failures += 1;
        }
        println!(
            "field {}: 2*lambda1*E={bound:.12e} (<= 1: {}) E={e:.12e} l2_norm={norm:.12e}",
            path.display(),
            if ok { "yes" } else { "NO" }
        );
    }
    if failures > 0 {
        println!("spectrum: FAILED {failures}/{} fields", fields.len());
        return Ok(1);
    }
    Ok(0)
}

struct Check {
    name: &'static str,
    value: f64,
    threshold: f64,
    pass: bool,
}

fn check(name: &'static str, value: f64, threshold: f64) -> Check {
    Check {
        name,
        value,
        threshold,
        pass: value <= threshold,
    }
}

/// The identity suite behind `verify`: spectral exactness, the two-route
/// constants, the linearization sign, and the maximizer sign property.
fn verify_checks(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let grid = Grid::new(cfg.n)?;
    let mut checks = Vec::new();

    // transform and operator identities on seeded random fields
    let mut round_trip = 0.0_f64;
    let mut laplace = 0.0_f64;
    let mut self_adj = 0.0_f64;
    let mut parseval = 0.0_f64;
    let mut en_ident = 0.0_f64;
    let mut div = 0.0_f64;
    for seed in 0..20u64 {
        let w = random_band_limited(grid, grid.n(), seed);
        let back = SpectralField::forward(&w.inverse());
        let scale = w.max_abs_coeff().max(1e-300);
        round_trip = round_trip.max(
            w.coeffs()
                .iter()
                .zip(back.coeffs().iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                / scale,
        );
        let nodal = w.inverse();
        let recovered = SpectralField::forward(&nodal).green().laplacian_neg();
        laplace = laplace.max(
            (&recovered.inverse() - &nodal).max_abs() / nodal.max_abs().max(1e-300),
        );
        let v = random_band_limited(grid, grid.n(), seed + 1000).inverse();
        let gv = SpectralField::forward(&v).green().inverse();
        let gw = SpectralField::forward(&nodal).green().inverse();
        let a = v.inner(&gw);
        let b = gv.inner(&nodal);
        self_adj = self_adj.max((a - b).abs() / a.abs().max(b.abs()).max(1e-300));
        let coeff_sq = w.coeff_l2().powi(2);
        parseval = parseval.max((nodal.lp_norm(2.0)?.powi(2) - coeff_sq).abs() / coeff_sq);
        en_ident =
            en_ident.max((w.energy_norm().powi(2) - 2.0 * w.energy()).abs() / (2.0 * w.energy()));
        let (u1, u2) = w.green().velocity();
        let speed = u1.max_abs().max(u2.max_abs()).max(1e-300);
        div = div.max(divergence_coeffs(&u1, &u2).max_abs_coeff() / speed);
    }
    checks.push(check("transform_round_trip", round_trip, limits::ROUNDOFF_REL));
    checks.push(check("laplacian_inverts_green", laplace, limits::SPECTRAL_EXACTNESS));
    checks.push(check("green_self_adjoint", self_adj, limits::ROUNDOFF_REL));
    checks.push(check("parseval", parseval, limits::PARSEVAL_REL));
    checks.push(check("energy_norm_identity", en_ident, limits::ENERGY_NORM_IDENTITY_REL));
    checks.push(check("velocity_divergence", div, limits::ROUNDOFF_REL));

    // closed-form eigenvalue case
    let opts = solver_options(cfg);
    let (_, e1_eigen) = maximize_energy_ball(1.0, grid, &opts)?;
    checks.push(check("eigen_ball_maximum", (e1_eigen - 0.25).abs(), limits::EIGEN_E1_ABS));

    // two-route constants at the configured exponent
    let p = if cfg.p > 1.0 { cfg.p } else { 2.0 };
    let sol = solve_ground_state(p, grid, &opts)?;
    let (wstar, e1) = maximize_energy_ball(p, grid, &opts)?;
    let d = derive_constants(p, sol.c_p.expect("ground state has c_p"), e1)?;
    let spread = (d.mu_from_cp - d.mu_from_e1).abs() / d.mu_from_cp;
    checks.push(check("two_route_mu", spread, limits::CROSS_ROUTE_REL));
    let m_ball = d.mu_from_cp * d.mu_from_cp * e1;
    let target = d.mu_from_cp.powf(1.0 + 1.0 / p);
    checks.push(check(
        "energy_max_identity",
        (2.0 * m_ball - target).abs() / target,
        limits::CROSS_ROUTE_REL,
    ));

    // linearization sign: must be negative and equal (1−p)·∫|u|^{p+1}
    let diag = diagnostics(&sol.u, p)?;
    let pow = sol.u.abs_pow_integral(p + 1.0);
    let expected = (1.0 - p) * pow;
    let sign_ok = diag.rayleigh_check < 0.0;
    let agreement = (diag.rayleigh_check - expected).abs() / expected.abs();
    checks.push(Check {
        name: "rayleigh_sign",
        value: diag.rayleigh_check,
        threshold: 0.0,
        pass: sign_ok,
    });
    checks.push(check("rayleigh_identity", agreement, limits::RAYLEIGH_REL));
    checks.push(check("nehari_deficit", diag.nehari_deficit, limits::NEHARI_DEFICIT_ABS));

    // converged maximizers are nodally sign-definite
    let definite = wstar.min_value() > 0.0 || wstar.max_value() < 0.0;
    checks.push(Check {
        name: "maximizer_sign_definite",
        value: if definite { 0.0 } else { 1.0 },
        threshold: 0.5,
        pass: definite,
    });
    Ok(checks)
}

fn cmd_verify(cfg: &ExperimentConfig) -> Result<i32> {
    let checks = verify_checks(cfg)?;
    ensure_out(cfg)?;
    let mut csv = format!("# config: {}\n", cfg.echo());
    csv.push_str("check,value,threshold,pass\n");
    for c in &checks {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            c.name,
            field_io::fmt_float(c.value),
            field_io::fmt_float(c.threshold),
            c.pass
        );
        println!(
            "{} {} value={:.6e} threshold={:.6e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    let path = cfg.output_dir.join("verify.csv");
    fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        println!("verify: FAILED {failed}/{} checks", checks.len());
        return Ok(1);
    }
    println!("verify: PASSED {}/{} checks", checks.len(), checks.len());
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<i32> {
    match &cli.command {
        Cmd::GroundState(common) => cmd_ground_state(&common.resolve(CommandKind::GroundState)?),
        Cmd::Maximize(common) => cmd_maximize(&common.resolve(CommandKind::Maximize)?),
        Cmd::Evolve { common, field } => {
            cmd_evolve(&common.resolve(CommandKind::Evolve)?, field.as_ref())
        }
        Cmd::Stability(common) => cmd_stability(&common.resolve(CommandKind::Stability)?),
        Cmd::Spectrum { common, fields } => {
            cmd_spectrum(&common.resolve(CommandKind::Spectrum)?, fields)
        }
        Cmd::Verify(common) => cmd_verify(&common.resolve(CommandKind::Verify)?),
    }
}

/// Parses argv and runs the requested command, returning the process exit
/// code (0 success, 1 failure, 2 usage).
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn run_from_env() -> i32 {
    run(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(list: &[&str]) -> Vec<String> {
        std::iter::once("vortexlab")
            .chain(list.iter().copied())
            .map(String::from)
            .collect()
    }

    #[test]
    fn unknown_subcommand_exits_2() {
        assert_eq!(run(args(&["frobnicate"])), 2);
        assert_eq!(run(args(&[])), 2);
    }

    #[test]
    fn help_exits_0() {
        assert_eq!(run(args(&["--help"])), 0);
    }

    #[test]
    fn bad_flag_value_exits_1_with_validation() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o");
        assert_eq!(
            run(args(&[
                "ground-state",
                "--p",
                "0.5",
                "--out",
                out.to_str().unwrap()
            ])),
            1
        );
    }

    #[test]
    fn ground_state_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("gs");
        let code = run(args(&[
            "ground-state",
            "--p",
            "2",
            "--n",
            "24",
            "--out",
            out.to_str().unwrap(),
        ]));
        assert_eq!(code, 0);
        assert!(out.join("u.field").exists());
        assert!(out.join("omega.field").exists());
        let constants = fs::read_to_string(out.join("constants.txt")).unwrap();
        assert!(constants.starts_with("# config: "));
        assert!(constants.contains("\nc_p="));
        assert!(constants.contains("\niterations="));
    }

    #[test]
    fn config_file_drives_a_run_and_flags_override() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("exp.cfg");
        let out = dir.path().join("o");
        fs::write(
            &cfg_path,
            format!(
                "command=ground-state\np=3\nn=16\nout={}\n",
                out.to_str().unwrap()
            ),
        )
        .unwrap();
        let code = run(args(&[
            "ground-state",
            "--config",
            cfg_path.to_str().unwrap(),
            "--n",
            "20",
        ]));
        assert_eq!(code, 0);
        let constants = fs::read_to_string(out.join("constants.txt")).unwrap();
        assert!(constants.contains("\"n\":20"), "flag must override config");
    }
}
