//! Command-line front end: platform and matrix catalogs, single estimates,
//! comparison sweeps with CSV and SVG output, and simulation checks.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 bad arguments or unresolvable
//! names (including malformed input files), 3 a validation run found
//! violations.

pub mod chart;
pub mod registry;
pub mod sweep;
pub mod validate;

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use ice_core::complexity::{to_matrix_csv, Algorithm, Input};
use ice_core::energy::{evaluate, BoundMode};
use ice_core::platform::to_catalog_toml;
use ice_core::IceError;

use registry::Registry;
use sweep::{run_sweep, to_csv, SweepSpec};
use validate::{run_io_validation, run_lemma1, IoConfig, Lemma1Config, IO_RATIO_BAND};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(IceError),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: IceError },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub(crate) fn file(path: &Path, source: IceError) -> Self {
        CliError::File {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) | CliError::Model(_) | CliError::File { .. } => 2,
            CliError::Validation(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ice",
    version,
    about = "Energy complexity estimates for multithreaded algorithms"
)]
pub struct Cli {
    /// Extra platform profiles (TOML), appended to the built-in catalog.
    #[arg(long, global = true)]
    pub platforms_file: Option<PathBuf>,
    /// Extra matrix descriptors (CSV), appended to the built-in catalog.
    #[arg(long, global = true)]
    pub matrices_file: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the platform catalog with units.
    ListPlatforms,
    /// Print the sparse matrix catalog.
    ListMatrices,
    /// Print the catalogs in their file formats, as a starting point for
    /// user files.
    ExportCatalog {
        #[arg(long, value_enum, default_value = "platforms")]
        which: CatalogKind,
    },
    /// Energy of one algorithm on one input and platform.
    Estimate {
        #[arg(long)]
        algorithm: String,
        /// Matrix name, or a dense size `N` or `NxMxP`.
        #[arg(long)]
        input: String,
        #[arg(long)]
        platform: String,
        #[arg(long, default_value = "auto")]
        bound_mode: String,
    },
    /// Energy ratio of two algorithms over inputs × platforms.
    Compare(CompareArgs),
    /// Check Q_P <= P * Q_1 on random multi-core traces.
    ValidateLemma1 {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
        cores: Vec<u32>,
        #[arg(long, default_value_t = 10_000)]
        trace_len: usize,
        #[arg(long, default_value_t = 256)]
        addresses: u64,
        #[arg(long, default_value_t = 8)]
        capacity_lines: usize,
        #[arg(long, default_value_t = 8)]
        line_elements: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Closed-form I/O against simulated misses on kernel traces.
    ValidateIo {
        #[arg(long)]
        kernel: String,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<u64>,
        #[arg(long, default_value_t = 0.1)]
        density: f64,
        #[arg(long, default_value_t = 8)]
        line_elements: u64,
        /// Defaults to 4 for SpMV kernels, 64 for matmul.
        #[arg(long)]
        capacity_lines: Option<usize>,
        /// CSB block dimension; defaults to ceil(sqrt(n)).
        #[arg(long)]
        beta: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = ice_core::cachesim::DEFAULT_TRACE_CAP)]
        trace_cap: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CatalogKind {
    Platforms,
    Matrices,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    /// CSC vs CSB, all catalog matrices, Xeon and Xeon-Phi, memory-bound.
    Spmv,
    /// Basic vs cache-oblivious matmul, 256..2048, Xeon and Xeon-Phi, cpu-bound.
    Matmul,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Fills in algorithms, inputs, platforms and bound mode; explicit
    /// flags override it.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Give twice: the ratio is energy(first) / energy(second).
    #[arg(long, value_delimiter = ',')]
    pub algorithm: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub input: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub platform: Vec<String>,
    #[arg(long)]
    pub bound_mode: Option<String>,
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    #[arg(long)]
    pub out_chart: Option<PathBuf>,
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let registry = Registry::load(cli.platforms_file.as_deref(), cli.matrices_file.as_deref())?;
    match &cli.command {
        Command::ListPlatforms => out.write_all(platform_table(&registry).as_bytes())?,
        Command::ListMatrices => out.write_all(matrix_table(&registry).as_bytes())?,
        Command::ExportCatalog { which } => {
            let text = match which {
                CatalogKind::Platforms => to_catalog_toml(&registry.platforms),
                CatalogKind::Matrices => to_matrix_csv(&registry.matrices),
            };
            out.write_all(text.as_bytes())?;
        }
        Command::Estimate {
            algorithm,
            input,
            platform,
            bound_mode,
        } => {
            let text = estimate_report(&registry, algorithm, input, platform, bound_mode)?;
            out.write_all(text.as_bytes())?;
        }
        Command::Compare(args) => compare_command(&registry, args, out)?,
        Command::ValidateLemma1 {
            trials,
            cores,
            trace_len,
            addresses,
            capacity_lines,
            line_elements,
            seed,
        } => {
            let cfg = Lemma1Config {
                trials: *trials,
                cores: cores.clone(),
                trace_len: *trace_len,
                addresses: *addresses,
                capacity_lines: *capacity_lines,
                line_elements: *line_elements,
                seed: *seed,
            };
            let s = run_lemma1(&cfg)?;
            writeln!(out, "trials     {}", s.trials)?;
            writeln!(out, "passed     {}", s.passed)?;
            writeln!(out, "failed     {}", s.failures.len())?;
            writeln!(out, "max ratio  {:.6}  (Q_P / (P * Q_1))", s.max_ratio)?;
            for f in &s.failures {
                writeln!(
                    out,
                    "violation  trial {} P={} Q_P={} P*Q_1={}",
                    f.trial, f.cores, f.report.q_p, f.report.p_times_q1
                )?;
            }
            if !s.failures.is_empty() {
                return Err(CliError::Validation(format!(
                    "{} of {} trials violate Q_P <= P * Q_1",
                    s.failures.len(),
                    s.trials
                )));
            }
        }
        Command::ValidateIo {
            kernel,
            sizes,
            density,
            line_elements,
            capacity_lines,
            beta,
            seed,
            trace_cap,
        } => {
            let cfg = IoConfig {
                kernel: Algorithm::from_name(kernel)?,
                sizes: sizes.clone(),
                density: *density,
                line_elements: *line_elements,
                capacity_lines: *capacity_lines,
                beta: *beta,
                seed: *seed,
                trace_cap: *trace_cap,
            };
            let geom = cfg.geometry()?;
            let rows = run_io_validation(&cfg)?;
            writeln!(
                out,
                "kernel {}, B = {} elements, Z = {} elements",
                cfg.kernel.name(),
                geom.line_elements,
                geom.cache_elements()
            )?;
            writeln!(
                out,
                "{:>8} {:>14} {:>14} {:>8}  flag",
                "size", "closed_io", "simulated", "ratio"
            )?;
            let mut outside = 0;
            for r in &rows {
                let flag = if r.within_band { "" } else { "  OUTSIDE" };
                outside += usize::from(!r.within_band);
                writeln!(
                    out,
                    "{:>8} {:>14} {:>14} {:>8.3}{flag}",
                    r.size, r.closed_form_io, r.simulated_misses, r.ratio
                )?;
            }
            if outside > 0 {
                return Err(CliError::Validation(format!(
                    "{outside} of {} sizes outside [{}, {}]",
                    rows.len(),
                    IO_RATIO_BAND.0,
                    IO_RATIO_BAND.1
                )));
            }
        }
    }
    Ok(())
}

pub fn platform_table(registry: &Registry) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<22} {:<22} {:>10} {:>10} {:>10} {:>10} {:>4} {:>8} {:>5}",
        "name", "processor", "eps_op", "pi_op", "eps_io", "pi_io", "B", "Z", "cores"
    );
    let _ = writeln!(
        s,
        "{:<22} {:<22} {:>10} {:>10} {:>10} {:>10} {:>4} {:>8} {:>5}",
        "", "", "nJ", "nJ", "nJ", "nJ", "elem", "elem", ""
    );
    for p in &registry.platforms {
        let _ = writeln!(
            s,
            "{:<22} {:<22} {:>10.3} {:>10.3} {:>10.2} {:>10.2} {:>4} {:>8} {:>5}",
            p.name,
            p.processor,
            p.eps_op,
            p.pi_op,
            p.eps_io,
            p.pi_io,
            p.cacheline_elements,
            p.private_cache_elements,
            p.core_count
                .map_or_else(|| "-".to_string(), |c| c.to_string())
        );
    }
    s
}

pub fn matrix_table(registry: &Registry) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<16} {:>10} {:>10} {:>12} {:>8} {:>8} {:>6}",
        "name", "n", "m", "nz", "nc", "nr", "beta"
    );
    for m in &registry.matrices {
        let i = &m.input;
        let opt = |v: Option<u64>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
        let _ = writeln!(
            s,
            "{:<16} {:>10} {:>10} {:>12} {:>8} {:>8} {:>6}",
            m.name,
            i.rows,
            i.cols,
            i.nonzeros,
            i.max_nnz_per_col,
            opt(i.max_nnz_per_row),
            opt(i.block_dim)
        );
    }
    s
}

pub fn estimate_report(
    registry: &Registry,
    algorithm: &str,
    input: &str,
    platform: &str,
    bound_mode: &str,
) -> Result<String, CliError> {
    let algorithm = Algorithm::from_name(algorithm)?;
    let input = registry.input(input)?;
    let profile = registry.platform(platform)?;
    let mode: BoundMode = bound_mode.parse()?;
    let ev = evaluate(algorithm, &input.input, profile, mode)?;
    let e = ev.estimate;
    let mut s = String::new();
    let _ = writeln!(s, "algorithm    {}", algorithm.name());
    let _ = writeln!(s, "input        {}", input.name);
    if let Input::Sparse(sp) = &input.input {
        if algorithm == Algorithm::Csb {
            let _ = writeln!(s, "beta         {}", sp.effective_block_dim());
        }
    }
    let _ = writeln!(s, "platform     {} ({})", profile.name, profile.processor);
    let _ = writeln!(s, "bound mode   {mode}");
    let _ = writeln!(s, "work         {}", ev.triple.work());
    let _ = writeln!(s, "span         {}", ev.triple.span());
    let _ = writeln!(s, "io           {}", ev.triple.io());
    let _ = writeln!(s, "compute      {:.3} nJ", e.compute_energy);
    let _ = writeln!(s, "memory       {:.3} nJ", e.memory_energy);
    let _ = writeln!(s, "static       {:.3} nJ", e.static_energy);
    let _ = writeln!(s, "total        {:.3} nJ", e.total);
    let _ = writeln!(s, "boundedness  {}", e.boundedness);
    Ok(s)
}

/// Resolves the preset and explicit flags into a sweep.
pub fn sweep_spec(registry: &Registry, args: &CompareArgs) -> Result<SweepSpec, CliError> {
    let mut spec = match args.preset {
        Some(Preset::Spmv) => SweepSpec::spmv_preset(registry),
        Some(Preset::Matmul) => SweepSpec::matmul_preset(),
        None => SweepSpec {
            algorithms: Vec::new(),
            inputs: Vec::new(),
            platforms: Vec::new(),
            bound_mode: BoundMode::Auto,
        },
    };
    if !args.algorithm.is_empty() {
        spec.algorithms = args
            .algorithm
            .iter()
            .map(|a| Algorithm::from_name(a))
            .collect::<Result<_, _>>()?;
    }
    if !args.input.is_empty() {
        spec.inputs = args.input.clone();
    }
    if !args.platform.is_empty() {
        spec.platforms = args.platform.clone();
    }
    if let Some(mode) = &args.bound_mode {
        spec.bound_mode = mode.parse()?;
    }
    spec.validate()?;
    Ok(spec)
}

fn compare_command(
    registry: &Registry,
    args: &CompareArgs,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let spec = sweep_spec(registry, args)?;
    let rows = run_sweep(&spec, registry)?;
    let csv = to_csv(&rows);
    match &args.out_csv {
        Some(path) => {
            write_file(path, &csv)?;
            writeln!(out, "wrote {} rows to {}", rows.len(), path.display())?;
        }
        None => out.write_all(csv.as_bytes())?,
    }
    if let Some(path) = &args.out_chart {
        let title = format!(
            "{} / {} energy ({} mode)",
            spec.algorithms[0].name(),
            spec.algorithms[1].name(),
            spec.bound_mode
        );
        write_file(path, &chart::ratio_chart_svg(&rows, &title))?;
        writeln!(out, "wrote chart to {}", path.display())?;
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
