use clap::{Parser, Subcommand, ValueEnum};
use darkline::config::{figure_curves, load_config, CliError, RunConfig};
use darkline::darklines::{count_peaks, detect_dips, find_zeros, predict_dark_lines};
use darkline::oracle::{
    compare_spectra, discretized_mode_evolve, solve_volterra, spectrum_from_trajectory,
    CombOptions, ModeComb,
};
use darkline::report::{
    spectrum_csv, write_atomic, CurveSummary, DarklinesSummary, FigureSummary, GridInfo,
    OracleSummary, SpectrumSummary,
};
use darkline::spectra::{eval_grid, Normalization};
use darkline::ConfigError;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

/// Relative threshold below which a sampled minimum is considered a
/// dark-line candidate.
const ZERO_REL_TOL: f64 = 0.05;
/// Relative threshold for dips reported from oracle (sampled-only) spectra.
const DIP_REL_TOL: f64 = 0.02;

#[derive(Parser)]
#[command(
    name = "darkline",
    version,
    about = "Emission spectra and dark lines of an emitter coupled to a flat and a structured reservoir"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizeArg {
    /// γ |N/D|² as computed
    Raw,
    /// rescaled so the maximum sample is 1
    Peak,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleMethod {
    /// product-integration solver for the memory-kernel equations
    Volterra,
    /// discrete mode-comb evolution
    Comb,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the closed-form spectrum and write it as CSV
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path (falls back to the config's "out" key)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        normalize: Option<NormalizeArg>,
    },
    /// Predict the dark-line catalogue and locate the spectrum zeros
    Darklines {
        #[arg(long)]
        config: PathBuf,
    },
    /// Rebuild the spectrum with a time-domain oracle and compare
    Oracle {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path for the oracle spectrum
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "volterra")]
        method: OracleMethod,
        #[arg(long, value_enum)]
        normalize: Option<NormalizeArg>,
    },
    /// Reproduce a figure preset: three curves (δ_g = 0, 1, −1) as CSV
    /// plus one reloadable config per curve
    Figure {
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=9))]
        id: u8,
        #[arg(long)]
        outdir: PathBuf,
        #[arg(long, value_enum)]
        normalize: Option<NormalizeArg>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn resolve_normalization(
    cfg: &RunConfig,
    flag: Option<NormalizeArg>,
) -> Result<Normalization, CliError> {
    match flag {
        Some(NormalizeArg::Raw) => Ok(Normalization::Raw),
        Some(NormalizeArg::Peak) => Ok(Normalization::PeakUnit),
        None => Ok(cfg.normalization()?),
    }
}

fn normalization_name(norm: Normalization) -> &'static str {
    match norm {
        Normalization::Raw => "raw",
        Normalization::PeakUnit => "peak",
    }
}

fn output_path(flag: Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf, CliError> {
    flag.or_else(|| cfg.out.clone().map(PathBuf::from))
        .ok_or_else(|| {
            CliError::Validation(ConfigError {
                field: "out",
                reason: "no output path: pass --out or set \"out\" in the config".to_string(),
            })
        })
}

fn print_summary<T: serde::Serialize>(summary: &T) {
    println!("{}", serde_json::to_string_pretty(summary).expect("summary is serializable"));
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Spectrum {
            config,
            out,
            normalize,
        } => cmd_spectrum(&config, out, normalize),
        Command::Darklines { config } => cmd_darklines(&config),
        Command::Oracle {
            config,
            out,
            method,
            normalize,
        } => cmd_oracle(&config, out, method, normalize),
        Command::Figure {
            id,
            outdir,
            normalize,
        } => cmd_figure(id, &outdir, normalize),
    }
}

fn cmd_spectrum(
    config: &Path,
    out: Option<PathBuf>,
    normalize: Option<NormalizeArg>,
) -> Result<(), CliError> {
    let started = Instant::now();
    let cfg = load_config(config)?;
    let emitter = cfg.emitter()?;
    let grid = cfg.grid()?;
    let norm = resolve_normalization(&cfg, normalize)?;
    let out_path = output_path(out, &cfg)?;
    let spec = eval_grid(&emitter, grid, norm)?;
    let zeros = find_zeros(&emitter, &spec, ZERO_REL_TOL);
    let peaks = count_peaks(&spec);
    write_atomic(&out_path, spectrum_csv(&spec).as_bytes())?;
    print_summary(&SpectrumSummary {
        command: "spectrum",
        grid: GridInfo::from(&grid),
        normalization: normalization_name(norm),
        out: out_path.display().to_string(),
        peaks,
        zeros,
        runtime_ms: started.elapsed().as_millis(),
    });
    Ok(())
}

fn cmd_darklines(config: &Path) -> Result<(), CliError> {
    let started = Instant::now();
    let cfg = load_config(config)?;
    let emitter = cfg.emitter()?;
    let grid = cfg.grid()?;
    let dark_lines = predict_dark_lines(&emitter);
    let spec = eval_grid(&emitter, grid, Normalization::Raw)?;
    let zeros = find_zeros(&emitter, &spec, ZERO_REL_TOL);
    let peaks = count_peaks(&spec);
    print_summary(&DarklinesSummary {
        command: "darklines",
        grid: GridInfo::from(&grid),
        dark_lines,
        peaks,
        zeros,
        runtime_ms: started.elapsed().as_millis(),
    });
    Ok(())
}

fn cmd_oracle(
    config: &Path,
    out: Option<PathBuf>,
    method: OracleMethod,
    normalize: Option<NormalizeArg>,
) -> Result<(), CliError> {
    let started = Instant::now();
    let cfg = load_config(config)?;
    let emitter = cfg.emitter()?;
    let grid = cfg.grid()?;
    let norm = resolve_normalization(&cfg, normalize)?;
    let settings = cfg.oracle_settings()?;
    let out_path = output_path(out, &cfg)?;

    let closed = eval_grid(&emitter, grid, Normalization::Raw)?;
    let (method_name, oracle_raw) = match method {
        OracleMethod::Volterra => {
            let mut traj = solve_volterra(&emitter, settings.t_max, settings.dt)?;
            traj.trapping = settings.trapping;
            ("volterra", spectrum_from_trajectory(&traj, grid)?)
        }
        OracleMethod::Comb => {
            let comb = ModeComb::for_model(&emitter.model, emitter.g, settings.comb_spacing);
            let (spec, _norms) = discretized_mode_evolve(
                &emitter,
                &comb,
                grid,
                settings.t_max,
                settings.comb_dt,
                CombOptions {
                    full_unitarity: false,
                    trapping: settings.trapping,
                },
            )?;
            ("comb", spec)
        }
    };
    let max_rel_err = compare_spectra(&closed, &oracle_raw, 0.1)?;
    let zeros = detect_dips(&oracle_raw, DIP_REL_TOL);
    let oracle_spec = oracle_raw.normalized(norm);
    let peaks = count_peaks(&oracle_spec);
    write_atomic(&out_path, spectrum_csv(&oracle_spec).as_bytes())?;
    print_summary(&OracleSummary {
        command: "oracle",
        method: method_name,
        grid: GridInfo::from(&grid),
        normalization: normalization_name(norm),
        out: out_path.display().to_string(),
        peaks,
        zeros,
        max_rel_err,
        runtime_ms: started.elapsed().as_millis(),
    });
    Ok(())
}

fn cmd_figure(id: u8, outdir: &Path, normalize: Option<NormalizeArg>) -> Result<(), CliError> {
    let started = Instant::now();
    std::fs::create_dir_all(outdir)?;
    let curves = figure_curves(id).expect("clap restricts id to 2..=9");
    let mut summaries = Vec::with_capacity(curves.len());
    let mut grid_info = None;
    let mut norm_name = "raw";
    for (label, mut cfg) in curves {
        let norm = resolve_normalization(&cfg, normalize)?;
        // bake the effective normalization and output into the emitted
        // config so reloading it reproduces this exact run
        cfg.normalization = Some(normalization_name(norm).to_string());
        let csv_name = format!("fig{id}_{label}.csv");
        let config_name = format!("fig{id}_{label}.json");
        cfg.out = Some(csv_name.clone());

        let emitter = cfg.emitter()?;
        let grid = cfg.grid()?;
        let spec = eval_grid(&emitter, grid, norm)?;
        let zeros = find_zeros(&emitter, &spec, ZERO_REL_TOL);
        let peaks = count_peaks(&spec);
        write_atomic(&outdir.join(&csv_name), spectrum_csv(&spec).as_bytes())?;
        let mut config_json = serde_json::to_string_pretty(&cfg).expect("config is serializable");
        config_json.push('\n');
        write_atomic(&outdir.join(&config_name), config_json.as_bytes())?;
        grid_info = Some(GridInfo::from(&grid));
        norm_name = normalization_name(norm);
        summaries.push(CurveSummary {
            label,
            csv: csv_name,
            config: config_name,
            peaks,
            zeros,
        });
    }
    print_summary(&FigureSummary {
        command: "figure",
        figure: id,
        outdir: outdir.display().to_string(),
        grid: grid_info.expect("at least one curve"),
        normalization: norm_name,
        curves: summaries,
        runtime_ms: started.elapsed().as_millis(),
    });
    Ok(())
}
