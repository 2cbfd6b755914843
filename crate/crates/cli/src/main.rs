use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use casimir_cli::output::emit;
use casimir_cli::presets::{run_preset, PRESETS};
use casimir_cli::run::{materials_table, reflect_table};
use casimir_cli::scenario::{parse_high_decay, parse_length_grid, parse_low_tail, MaterialSpec};
use casimir_cli::{run_scenario, CliError, CliResult, ScenarioBuilder, Task};
use casimir_core::units::HBAR_C;
use casimir_core::SlabGeometry;
use clap::{Args, Parser, Subcommand};

const THREADS_ENV: &str = "CASIMIR_ENZ_THREADS";

/// Casimir pressure, force spectra and force density of thin films.
#[derive(Parser)]
#[command(name = "casimir-enz", version)]
struct Cli {
    /// Worker threads; overrides CASIMIR_ENZ_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Total pressure as one JSON line per (t, d).
    Pressure(TaskArgs),
    /// Spectral density of the pressure over real frequency (CSV).
    Spectrum(TaskArgs),
    /// Resonant peak-valley pairs and band pressures per gap (CSV).
    Modes(TaskArgs),
    /// Force density |P|/t versus thickness (CSV).
    Fom(TaskArgs),
    /// Dielectric function inspection.
    Materials {
        #[command(subcommand)]
        command: MaterialsCommand,
    },
    /// Reflection diagnostics.
    Optics {
        #[command(subcommand)]
        command: OpticsCommand,
    },
    /// Regenerate a figure data set.
    Preset {
        /// One of fig1, fig2, fig3, figS1, figS2.
        name: String,
        #[arg(long)]
        outdir: PathBuf,
        /// Directory holding au_nk.txt and sio2_nk.txt (figS2).
        #[arg(long, default_value = "data")]
        data_dir: PathBuf,
    },
}

/// Flags mirror scenario keys and override values from `--scenario`.
#[derive(Args, Default)]
struct TaskArgs {
    /// Scenario file with `key = value` lines.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// drude:omega_p,gamma_p | lorentz:C_L,omega_L,gamma_L | table:PATH
    #[arg(long)]
    material: Option<String>,
    /// Below-table continuation: none | constant | drude:omega_p,gamma_p
    #[arg(long, allow_hyphen_values = true)]
    low_tail: Option<String>,
    /// Above-table decay exponent or none.
    #[arg(long, allow_hyphen_values = true)]
    high_decay: Option<String>,
    /// Film thickness or grid, e.g. `2nm`, `log(0.5,500,24) nm`.
    #[arg(long = "t", allow_hyphen_values = true)]
    t: Option<String>,
    /// Gap or grid, e.g. `10,100,1000 nm`.
    #[arg(long = "d", allow_hyphen_values = true)]
    d: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    rel_tol: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    abs_tol: Option<String>,
    #[arg(long)]
    max_evals: Option<String>,
    /// Spectrum window start in eV.
    #[arg(long, allow_hyphen_values = true)]
    omega_min: Option<String>,
    /// Spectrum window end in eV.
    #[arg(long, allow_hyphen_values = true)]
    omega_max: Option<String>,
    /// Uniform spectrum grid size before refinement.
    #[arg(long)]
    points: Option<String>,
    /// Refine around spectral extrema (true/false).
    #[arg(long)]
    refine: Option<String>,
    /// Report the optimal thickness per gap instead of the FOM table.
    #[arg(long)]
    find_optimum: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<String>,
}

#[derive(Subcommand)]
enum MaterialsCommand {
    /// Print ε(ω) and ε(iξ) on a logarithmic grid as CSV.
    Show {
        /// Material spec or n,k table path.
        material: String,
        #[arg(long, allow_hyphen_values = true, default_value = "constant")]
        low_tail: String,
        #[arg(long, default_value = "2")]
        high_decay: String,
        #[arg(long, default_value_t = 0.01)]
        omega_min: f64,
        #[arg(long, default_value_t = 100.0)]
        omega_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum OpticsCommand {
    /// Slab reflection coefficients r_TE, r_TM versus k at fixed energy.
    Reflect {
        #[arg(long)]
        material: String,
        /// Film thickness.
        #[arg(long = "t", allow_hyphen_values = true)]
        t: String,
        /// Photon energy in eV.
        #[arg(long)]
        omega: f64,
        /// Largest wavevector in 1/nm; defaults to three times the light line.
        #[arg(long)]
        k_max: Option<f64>,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, default_value = "constant")]
        low_tail: String,
        #[arg(long, default_value = "2")]
        high_decay: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn configure_threads(flag: Option<usize>) -> CliResult<()> {
    let from_env = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::scenario(format!("{THREADS_ENV} must be a thread count, got '{v}'")))?,
        ),
        Err(_) => None,
    };
    if let Some(n) = flag.or(from_env) {
        if n == 0 {
            return Err(CliError::scenario("thread count must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::scenario(format!("configuring threads: {e}")))?;
    }
    Ok(())
}

fn run_task(task: Task, args: TaskArgs) -> CliResult<()> {
    let mut builder = match &args.scenario {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("reading scenario {}: {e}", path.display())))?;
            ScenarioBuilder::parse(&text).map_err(|e| CliError::scenario(format!("{}: {e}", path.display())))?
        }
        None => ScenarioBuilder::new(),
    };
    if let Some(declared) = builder.value("task") {
        if declared != task.to_string() {
            return Err(CliError::scenario(format!(
                "scenario declares task '{declared}' but the subcommand is '{task}'"
            )));
        }
    }
    builder.set("task", task.to_string())?;
    let flags = [
        ("material", args.material),
        ("low_tail", args.low_tail),
        ("high_decay", args.high_decay),
        ("t", args.t),
        ("d", args.d),
        ("rel_tol", args.rel_tol),
        ("abs_tol", args.abs_tol),
        ("max_evals", args.max_evals),
        ("omega_min", args.omega_min),
        ("omega_max", args.omega_max),
        ("points", args.points),
        ("refine", args.refine),
        ("output", args.output),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            builder.set(key, v)?;
        }
    }
    if args.find_optimum {
        builder.set("find_optimum", "true")?;
    }
    let scenario = builder.build()?;
    let text = run_scenario(&scenario)?;
    emit(scenario.output.as_deref(), &text)
}

fn build_material(spec: &str, low_tail: &str, high_decay: &str) -> CliResult<casimir_core::Material> {
    let spec: MaterialSpec = spec.parse().map_err(CliError::Scenario)?;
    let low = parse_low_tail(low_tail).map_err(|e| CliError::scenario(format!("--low-tail: {e}")))?;
    let high = parse_high_decay(high_decay).map_err(|e| CliError::scenario(format!("--high-decay: {e}")))?;
    spec.build(low, high)
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Pressure(a) => run_task(Task::Pressure, a),
        Command::Spectrum(a) => run_task(Task::Spectrum, a),
        Command::Modes(a) => run_task(Task::Modes, a),
        Command::Fom(a) => run_task(Task::Fom, a),
        Command::Materials {
            command:
                MaterialsCommand::Show {
                    material,
                    low_tail,
                    high_decay,
                    omega_min,
                    omega_max,
                    points,
                    output,
                },
        } => {
            let m = build_material(&material, &low_tail, &high_decay)?;
            let table = materials_table(&m, omega_min, omega_max, points)?;
            emit(output.as_deref(), &table.render())
        }
        Command::Optics {
            command:
                OpticsCommand::Reflect {
                    material,
                    t,
                    omega,
                    k_max,
                    points,
                    low_tail,
                    high_decay,
                    output,
                },
        } => {
            let m = build_material(&material, &low_tail, &high_decay)?;
            let t = match parse_length_grid(&t).map_err(|e| CliError::scenario(format!("--t: {e}")))?[..] {
                [t] => t,
                _ => return Err(CliError::scenario("--t: expected a single thickness")),
            };
            let slab = SlabGeometry::new(t, m)?;
            let k_max = k_max.unwrap_or(3.0 * omega / HBAR_C);
            let table = reflect_table(&slab, omega, k_max, points)?;
            emit(output.as_deref(), &table.render())
        }
        Command::Preset { name, outdir, data_dir } => {
            if !PRESETS.contains(&name.as_str()) {
                return Err(CliError::scenario(format!(
                    "unknown preset '{name}' (expected one of {})",
                    PRESETS.join(", ")
                )));
            }
            for path in run_preset(&name, &outdir, &data_dir)? {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
