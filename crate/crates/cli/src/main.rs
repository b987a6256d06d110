use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rodhopf::{Error, Result};
use rodhopf_cli::{commands, CompareTolerances, Context, SweepSpec};

#[derive(Parser)]
#[command(name = "rodhopf", version, about = "Follower-force flutter of a Cosserat rod: spectra, Landau coefficients and limit cycles")]
struct Cli {
    /// JSON run specification.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for independent runs.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Collocation nodes.
    #[arg(long = "grid-n", global = true, default_value_t = rodhopf::grid::DEFAULT_NODES)]
    grid_n: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Leading eigenvalue pair over a force range, with the located thresholds.
    Spectrum,
    /// Landau coefficients at the Hopf threshold.
    Landau,
    /// Nonlinear runs over a force list and the square-root scaling fit.
    Sweep,
    /// Simulated against predicted amplitudes and frequencies.
    Compare {
        #[arg(long)]
        landau: PathBuf,
        #[arg(long)]
        sweep: PathBuf,
    },
}

fn load(cli: &Cli) -> Result<SweepSpec> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("--config is required for this command".into()))?;
    SweepSpec::load(path)
}

fn context(cli: &Cli, spec: Option<&SweepSpec>) -> Result<Context> {
    if cli.jobs == 0 {
        return Err(Error::InvalidConfig("--jobs must be at least 1".into()));
    }
    let out = cli
        .out
        .clone()
        .or_else(|| spec.and_then(|s| s.out_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("."));
    let ctx = Context {
        grid_n: cli.grid_n,
        jobs: cli.jobs,
        out,
    };
    ctx.grid()?;
    Ok(ctx)
}

fn opt(v: Option<f64>) -> String {
    v.map_or("-".to_string(), |x| format!("{x:.6}"))
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Spectrum => {
            let spec = load(cli)?;
            let ctx = context(cli, Some(&spec))?;
            let (rows, s) = commands::spectrum(&spec, &ctx)?;
            println!("rows           {}", rows.len());
            println!("force_star     {:.6}", s.force_star);
            println!("force_crit     {:.6}", s.force_crit);
            println!("omega_c        {:.6}", s.omega_c);
        }
        Command::Landau => {
            let spec = load(cli)?;
            let ctx = context(cli, Some(&spec))?;
            let r = commands::landau(&spec, &ctx)?;
            println!("force_crit     {:.6}", r.force_crit);
            println!("omega_c        {:.6}", r.omega_c);
            if let (Some(a), Some(b)) = (r.alpha, r.beta) {
                println!("alpha          {:.6} {:+.6}i", a[0], a[1]);
                println!("beta           {:.6} {:+.6}i", b[0], b[1]);
            }
            println!("C              {}", opt(r.c));
            if let Some(n) = &r.notice {
                println!("notice         {n}");
            }
        }
        Command::Sweep => {
            let spec = load(cli)?;
            let ctx = context(cli, Some(&spec))?;
            let (rows, rep) = commands::sweep(&spec, &ctx)?;
            println!("{:>10} {:>10} {:>12} {:>12}", "force", "outcome", "amplitude", "frequency");
            for r in &rows {
                println!(
                    "{:>10.4} {:>10} {:>12} {:>12}",
                    r.force_tilde,
                    format!("{:?}", r.outcome).to_lowercase(),
                    opt(r.amplitude),
                    opt(r.frequency)
                );
            }
            match &rep.fit {
                Some(f) => println!("C_fit {:.6}  p {}  points {}", f.c_fit, opt(f.exponent_p), f.points),
                None => println!("{}", rep.notice.as_deref().unwrap_or("no fit")),
            }
        }
        Command::Compare { landau, sweep } => {
            let tol = match &cli.config {
                Some(_) => load(cli)?.compare,
                None => CompareTolerances::default(),
            };
            let ctx = context(cli, None)?;
            let (rows, s) = commands::compare_files(landau, sweep, &tol, &ctx)?;
            println!(
                "{:>10} {:>12} {:>12} {:>9} {:>12} {:>12} {:>9}  note",
                "force", "sim_amp", "pred_amp", "err", "sim_freq", "pred_freq", "err"
            );
            for r in &rows {
                println!(
                    "{:>10.4} {:>12} {:>12.6} {:>9} {:>12} {:>12.6} {:>9}  {}",
                    r.force_tilde,
                    opt(r.sim_amplitude),
                    r.pred_amplitude,
                    r.amplitude_rel_error.map_or("-".into(), |e| format!("{:.2}%", 100.0 * e)),
                    opt(r.sim_frequency),
                    r.pred_frequency,
                    r.frequency_rel_error.map_or("-".into(), |e| format!("{:.2}%", 100.0 * e)),
                    r.note
                );
            }
            println!("{} of {} graded rows pass: {}", s.passed, s.graded, if s.pass { "PASS" } else { "FAIL" });
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
