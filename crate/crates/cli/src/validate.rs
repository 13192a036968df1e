//! Simulation-based checks: the private-cache miss bound on random traces
//! and closed-form I/O against simulated misses on kernel traces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ice_core::cachesim::{
    check_lemma1, simulate_ic, trace_basic_matmul, trace_co_matmul, trace_csb, trace_csc,
    trace_csr, Access, CacheGeometry, Lemma1Report, MemoryTrace, SparsePattern, TraceOptions,
    DEFAULT_TRACE_CAP,
};
use ice_core::complexity::{
    basic_matmul_complexity, co_matmul_complexity, csb_complexity, csc_complexity, csr_complexity,
    default_block_dim, Algorithm, DenseInput,
};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Config {
    pub trials: usize,
    /// Trial `t` runs on `cores[t % cores.len()]` cores.
    pub cores: Vec<u32>,
    pub trace_len: usize,
    pub addresses: u64,
    pub capacity_lines: usize,
    pub line_elements: u64,
    pub seed: u64,
}

impl Default for Lemma1Config {
    fn default() -> Self {
        Lemma1Config {
            trials: 1000,
            cores: vec![2, 4, 8],
            trace_len: 10_000,
            addresses: 256,
            capacity_lines: 8,
            line_elements: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Failure {
    pub trial: usize,
    pub cores: u32,
    pub report: Lemma1Report,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Summary {
    pub trials: usize,
    pub passed: usize,
    pub max_ratio: f64,
    pub failures: Vec<Lemma1Failure>,
}

/// Uniform random trace: each access picks a core and an address
/// independently.
pub fn random_trace(
    cores: u32,
    len: usize,
    addresses: u64,
    seed: u64,
) -> Result<MemoryTrace, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let accesses = (0..len)
        .map(|_| Access {
            core: rng.random_range(0..cores),
            address: rng.random_range(0..addresses),
        })
        .collect();
    Ok(MemoryTrace::new(accesses, cores as usize)?)
}

fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed ^ (trial as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

pub fn run_lemma1(cfg: &Lemma1Config) -> Result<Lemma1Summary, CliError> {
    if cfg.trials == 0 {
        return Err(CliError::Usage("trials must be positive".into()));
    }
    if cfg.trace_len == 0 {
        return Err(CliError::Usage("trace length must be positive".into()));
    }
    if cfg.addresses == 0 {
        return Err(CliError::Usage("address count must be positive".into()));
    }
    if cfg.cores.is_empty() || cfg.cores.contains(&0) {
        return Err(CliError::Usage("core counts must be positive".into()));
    }
    let geom = CacheGeometry::new(cfg.capacity_lines, cfg.line_elements)?;
    let reports: Vec<(usize, u32, Lemma1Report)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let p = cfg.cores[t % cfg.cores.len()];
            let trace = random_trace(p, cfg.trace_len, cfg.addresses, trial_seed(cfg.seed, t))?;
            Ok((t, p, check_lemma1(&trace, geom)?))
        })
        .collect::<Result<_, CliError>>()?;
    let max_ratio = reports
        .iter()
        .map(|(_, _, r)| r.ratio())
        .fold(0.0, f64::max);
    let failures: Vec<Lemma1Failure> = reports
        .iter()
        .filter(|(_, _, r)| !r.holds)
        .map(|&(trial, cores, report)| Lemma1Failure {
            trial,
            cores,
            report,
        })
        .collect();
    Ok(Lemma1Summary {
        trials: cfg.trials,
        passed: cfg.trials - failures.len(),
        max_ratio,
        failures,
    })
}

/// Square random pattern with each cell present independently with
/// probability `density`; never empty.
pub fn random_pattern(n: u32, density: f64, seed: u64) -> Result<SparsePattern, CliError> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(CliError::Usage(format!(
            "density must be in (0, 1], got {density}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords: Vec<(u32, u32)> = (0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .filter(|_| rng.random_bool(density))
        .collect();
    if coords.is_empty() {
        coords.push((0, 0));
    }
    Ok(SparsePattern::new(n, n, coords)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IoConfig {
    pub kernel: Algorithm,
    pub sizes: Vec<u64>,
    /// Sparse kernels only.
    pub density: f64,
    pub line_elements: u64,
    /// Defaults to 4 lines for SpMV kernels and 64 for matmul.
    pub capacity_lines: Option<usize>,
    /// CSB block dimension; defaults to ceil(sqrt(n)).
    pub beta: Option<u64>,
    pub seed: u64,
    pub trace_cap: usize,
}

impl IoConfig {
    pub fn new(kernel: Algorithm, sizes: Vec<u64>) -> Self {
        IoConfig {
            kernel,
            sizes,
            density: 0.1,
            line_elements: 8,
            capacity_lines: None,
            beta: None,
            seed: 0,
            trace_cap: DEFAULT_TRACE_CAP,
        }
    }

    pub fn geometry(&self) -> Result<CacheGeometry, CliError> {
        let default_lines = match self.kernel {
            Algorithm::BasicMatmul | Algorithm::CoMatmul => 64,
            _ => 4,
        };
        Ok(CacheGeometry::new(
            self.capacity_lines.unwrap_or(default_lines),
            self.line_elements,
        )?)
    }
}

/// Accepted band for simulated / closed-form misses.
pub const IO_RATIO_BAND: (f64, f64) = (0.25, 4.0);

#[derive(Debug, Clone, PartialEq)]
pub struct IoRow {
    pub kernel: Algorithm,
    pub size: u64,
    pub closed_form_io: u64,
    pub simulated_misses: u64,
    pub ratio: f64,
    pub within_band: bool,
}

pub fn run_io_validation(cfg: &IoConfig) -> Result<Vec<IoRow>, CliError> {
    if cfg.sizes.is_empty() {
        return Err(CliError::Usage("no sizes given".into()));
    }
    let geom = cfg.geometry()?;
    let opts = TraceOptions {
        cores: 1,
        cap: cfg.trace_cap,
    };
    cfg.sizes
        .iter()
        .map(|&size| {
            let (closed, trace) = kernel_case(cfg, size, geom, &opts)?;
            let simulated = simulate_ic(&trace, geom)?.misses_total;
            let ratio = simulated as f64 / closed as f64;
            Ok(IoRow {
                kernel: cfg.kernel,
                size,
                closed_form_io: closed,
                simulated_misses: simulated,
                ratio,
                within_band: (IO_RATIO_BAND.0..=IO_RATIO_BAND.1).contains(&ratio),
            })
        })
        .collect()
}

fn kernel_case(
    cfg: &IoConfig,
    size: u64,
    geom: CacheGeometry,
    opts: &TraceOptions,
) -> Result<(u64, MemoryTrace), CliError> {
    let b = geom.line_elements;
    match cfg.kernel {
        Algorithm::Csr | Algorithm::Csc | Algorithm::Csb => {
            let n = u32::try_from(size)
                .map_err(|_| CliError::Usage(format!("sparse size {size} is too large")))?;
            let pattern = random_pattern(n, cfg.density, cfg.seed ^ size)?;
            let desc = pattern.descriptor();
            match cfg.kernel {
                Algorithm::Csr => Ok((csr_complexity(&desc)?.io(), trace_csr(&pattern, opts)?)),
                Algorithm::Csc => Ok((csc_complexity(&desc)?.io(), trace_csc(&pattern, opts)?)),
                _ => {
                    let beta = cfg.beta.unwrap_or_else(|| default_block_dim(size));
                    let beta32 = u32::try_from(beta).map_err(|_| {
                        CliError::Usage(format!("block dimension {beta} is too large"))
                    })?;
                    let closed = csb_complexity(&desc.with_block_dim(beta)?, b)?.io();
                    Ok((closed, trace_csb(&pattern, beta32, opts)?))
                }
            }
        }
        Algorithm::BasicMatmul => {
            let d = DenseInput::square(size)?;
            let closed = basic_matmul_complexity(&d, b, 1)?.io();
            Ok((closed, trace_basic_matmul(size, size, size, opts)?))
        }
        Algorithm::CoMatmul => {
            let d = DenseInput::square(size)?;
            let closed = co_matmul_complexity(&d, b, geom.cache_elements(), 1)?.io();
            Ok((closed, trace_co_matmul(size, size, size, opts)?))
        }
    }
}
