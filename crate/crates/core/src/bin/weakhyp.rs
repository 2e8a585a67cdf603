use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use weakhyp::energy::{evolve_frequency, fit_growth, V0Policy};
use weakhyp::pipeline::{frequency_data, run_scenario, sweep_points, Stages};
use weakhyp::report::{emit_report, parse_report_json, read_sweep_csv, report_json, sweep_csv, Format, Report};
use weakhyp::scenario::Scenario;
use weakhyp::{Error, Result};

#[derive(Parser)]
#[command(name = "weakhyp", version, about = "Analyse weakly hyperbolic systems D_t u - A(t, D_x) u = 0")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hyperbolicity verdict, symmetriser minors and condition constants.
    Analyze(Common),
    /// Block Sylvester reduction residuals and lower-order bound.
    Reduce(Common),
    /// Integrate one frequency and write its energy trace.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Frequency magnitude |ξ| (default: the largest in the scenario).
        #[arg(long)]
        xi: Option<f64>,
        #[arg(long, default_value_t = 0)]
        direction: usize,
    },
    /// Frequency sweep of amplifications and energies.
    Sweep(Common),
    /// Growth-law fit, from a fresh sweep or a saved sweep CSV.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Re-emit a saved JSON report.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Both)]
        format: Format,
    },
    /// All stages.
    Pipeline(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file, or the name of a bundled scenario.
    #[arg(long)]
    scenario: Option<String>,
    /// Output directory (default: the scenario's output.dir, else ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Integrator tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Bad-set exponent q.
    #[arg(long)]
    q: Option<u32>,
    /// Drop frequency magnitudes above this value.
    #[arg(long = "xi-max")]
    xi_max: Option<f64>,
    /// Number of frequency directions.
    #[arg(long)]
    directions: Option<usize>,
    /// Seed of the Gaussian initial-data policy.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
}

impl Common {
    fn load(&self) -> Result<Scenario> {
        let spec = self
            .scenario
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("--scenario is required".into()))?;
        let mut sc = Scenario::load(spec)?;
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(Error::InvalidArgument(format!("--tol must be positive, got {t}")));
            }
            sc.tol.integrator = t;
        }
        if let Some(q) = self.q {
            if q == 0 {
                return Err(Error::InvalidArgument("--q must be at least 1".into()));
            }
            sc.bad_set.q = q;
        }
        if let Some(x) = self.xi_max {
            sc.grid.xi_magnitudes.retain(|m| *m <= x);
            if sc.grid.xi_magnitudes.is_empty() {
                return Err(Error::InvalidArgument(format!("--xi-max {x} removes every frequency")));
            }
        }
        if let Some(d) = self.directions {
            sc.grid.directions = d.max(1);
        }
        if let Some(s) = self.seed {
            sc.seed = s;
            if let V0Policy::Gaussian { .. } = sc.v0 {
                sc.v0 = V0Policy::Gaussian { seed: s };
            }
        }
        Ok(sc)
    }

    fn out_dir(&self, sc: &Scenario) -> PathBuf {
        self.out
            .clone()
            .or_else(|| sc.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

fn print_summary(r: &Report) {
    println!("scenario: {}", r.scenario.name);
    if let Some(h) = &r.hyperbolicity {
        println!("verdict: {:?} (max |Im λ| = {:.3e})", h.verdict, h.max_imag);
    }
    if let Some(c) = &r.conditions {
        println!("GR1m constant: {:?}", c.gr1m);
        println!("GRLevi constant: {:?}", c.gr_levi);
    }
    if let Some(red) = &r.reduction {
        println!("reduction residual: {:.3e}, order(C) = {:?}", red.residual, red.c_order);
        println!("lower-order bound: {:?}", red.lower_bound.bound);
    }
    if let Some(s) = &r.sweep {
        println!("sweep rows: {} ({} failed)", s.rows.len(), s.failures());
    }
    if let Some(f) = &r.fit {
        println!(
            "fit: {:?}, kappa = {:.4} (R² {:.4}), theta = {:.3} (R² {:.4})",
            f.model, f.kappa, f.poly_r2, f.theta, f.gevrey_r2
        );
    }
    for w in &r.warnings {
        println!("warning: {w}");
    }
    for v in &r.violations {
        println!("violation: {v}");
    }
    for f in &r.failures {
        println!("failure: {f}");
    }
}

fn finish(r: &Report, dir: &Path, format: Format) -> Result<i32> {
    print_summary(r);
    for p in emit_report(r, dir, format)? {
        println!("wrote {}", p.display());
    }
    Ok(r.exit_code())
}

fn stage(common: &Common, stages: Stages) -> Result<i32> {
    let sc = common.load()?;
    let r = run_scenario(&sc, stages)?;
    finish(&r, &common.out_dir(&sc), common.format)
}

fn evolve(common: &Common, xi: Option<f64>, direction: usize) -> Result<i32> {
    let sc = common.load()?;
    let points = sweep_points(&sc);
    let mag = xi.unwrap_or_else(|| sc.grid.xi_magnitudes.iter().copied().fold(f64::MIN, f64::max));
    let (row, dir) = points
        .iter()
        .enumerate()
        .find(|(_, p)| p.direction_index == direction)
        .map(|(k, p)| (k, p.xi.iter().map(|x| x / p.xi_mag).collect::<Vec<f64>>()))
        .ok_or_else(|| Error::InvalidArgument(format!("no direction {direction}")))?;
    let point: Vec<f64> = dir.iter().map(|d| d * mag).collect();
    let (bs, sp) = frequency_data(&sc, &point)?;
    let v0 = weakhyp::energy::sweep::initial_state(&bs, sc.v0, row)?;
    let cfg = weakhyp::pipeline::sweep_config(&sc);
    let tr = match evolve_frequency(&bs, &sp, &v0, sc.t_final, &cfg.evolve) {
        Ok(tr) => tr,
        Err(e @ (Error::StiffnessFailure { .. } | Error::NonFiniteState { .. })) => {
            eprintln!("error: {e}");
            return Ok(3);
        }
        Err(e) => return Err(e),
    };
    let dir_path = common.out_dir(&sc);
    std::fs::create_dir_all(&dir_path)?;
    let path = dir_path.join(format!("{}_trace.csv", sc.name));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["t", "e_kov", "e_hyp", "in_bad_set"])?;
    for (k, t) in tr.t_samples.iter().enumerate() {
        let inside = tr.bad_set.as_ref().is_none_or(|b| b.contains(*t));
        w.write_record([t.to_string(), tr.e_kov[k].to_string(), tr.e_hyp[k].to_string(), inside.to_string()])?;
    }
    w.flush()?;
    println!("xi = {point:?}: amplification {}", tr.amplification);
    if let Some(b) = &tr.bad_set {
        println!("bad set measure {} (epsilon {})", b.total_length, b.epsilon);
    }
    println!("wrote {}", path.display());
    Ok(0)
}

fn fit(common: &Common, input: Option<&Path>) -> Result<i32> {
    let Some(input) = input else {
        return stage(common, Stages::FIT);
    };
    let rows = read_sweep_csv(&std::fs::read_to_string(input)?)?;
    let mut by_mag: Vec<(f64, f64)> = Vec::new();
    for (mag, amp) in rows {
        match by_mag.iter_mut().find(|p| p.0 == mag) {
            Some(p) => p.1 = p.1.max(amp),
            None => by_mag.push((mag, amp)),
        }
    }
    let pts: Vec<(f64, f64)> = by_mag.into_iter().map(|(m, a)| ((1.0 + m * m).sqrt(), a)).collect();
    let f = fit_growth(&pts)?;
    println!("{}", serde_json::to_string_pretty(&f)?);
    Ok(0)
}

fn reemit(input: &Path, out: Option<&Path>, format: Format) -> Result<i32> {
    let r = parse_report_json(&std::fs::read_to_string(input)?)?;
    match out {
        Some(dir) => finish(&r, dir, format),
        None => {
            match format {
                Format::Json => print!("{}", report_json(&r)?),
                Format::Csv => print!("{}", sweep_csv(r.sweep.as_ref())?),
                Format::Both => {
                    print!("{}", report_json(&r)?);
                    print!("{}", sweep_csv(r.sweep.as_ref())?);
                }
            }
            Ok(r.exit_code())
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("WEAKHYP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // ignore failure: a global pool may already exist
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(c) => stage(c, Stages::ANALYZE),
        Command::Reduce(c) => stage(c, Stages::REDUCE),
        Command::Evolve { common, xi, direction } => evolve(common, *xi, *direction),
        Command::Sweep(c) => stage(c, Stages::SWEEP),
        Command::Fit { common, input } => fit(common, input.as_deref()),
        Command::Report { input, out, format } => reemit(input, out.as_deref(), *format),
        Command::Pipeline(c) => stage(c, Stages::ALL),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::IdenticallyZeroDelta { .. } | Error::NonRealSpectrum { .. } => ExitCode::from(2),
                Error::StiffnessFailure { .. } | Error::NonFiniteState { .. } | Error::InsufficientRange(_) => {
                    ExitCode::from(3)
                }
                _ => ExitCode::from(1),
            }
        }
    }
}
