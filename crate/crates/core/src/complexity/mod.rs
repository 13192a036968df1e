//! Work, span and I/O models for the SpMV and matmul kernels.
//!
//! Asymptotic constants are fixed at one (matmul keeps its literal 2nmp
//! flop count). Logarithms are base 2 rounded up. Intermediate terms stay
//! real-valued and only the final three counts are rounded up.

mod catalog;

pub use catalog::{
    builtin_matrix_catalog, find_matrix, parse_matrix_csv, to_matrix_csv, NamedMatrix,
};

use std::fmt;

use crate::error::{IceError, Result};
use crate::platform::PlatformProfile;

/// Descriptor statistics of a sparse matrix (`rows` × `cols`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparseInput {
    pub rows: u64,
    pub cols: u64,
    pub nonzeros: u64,
    /// Max nonzeros in any row. Not all catalogs carry it.
    pub max_nnz_per_row: Option<u64>,
    pub max_nnz_per_col: u64,
    pub block_dim: Option<u64>,
}

impl SparseInput {
    pub fn new(rows: u64, cols: u64, nonzeros: u64, max_nnz_per_col: u64) -> Result<Self> {
        let input = SparseInput {
            rows,
            cols,
            nonzeros,
            max_nnz_per_row: None,
            max_nnz_per_col,
            block_dim: None,
        };
        input.validate()?;
        Ok(input)
    }

    pub fn with_max_nnz_per_row(mut self, nr: u64) -> Result<Self> {
        self.max_nnz_per_row = Some(nr);
        self.validate()?;
        Ok(self)
    }

    pub fn with_block_dim(mut self, beta: u64) -> Result<Self> {
        self.block_dim = Some(beta);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 {
            return Err(IceError::invalid("rows", "must be positive"));
        }
        if self.cols == 0 {
            return Err(IceError::invalid("cols", "must be positive"));
        }
        if self.nonzeros as u128 > self.rows as u128 * self.cols as u128 {
            return Err(IceError::invalid("nonzeros", "exceeds rows x cols"));
        }
        if let Some(nr) = self.max_nnz_per_row {
            if nr > self.cols {
                return Err(IceError::invalid("max_nnz_per_row", "exceeds column count"));
            }
            if nr > self.nonzeros {
                return Err(IceError::invalid(
                    "max_nnz_per_row",
                    "exceeds nonzero count",
                ));
            }
        }
        if self.max_nnz_per_col > self.rows {
            return Err(IceError::invalid("max_nnz_per_col", "exceeds row count"));
        }
        if self.max_nnz_per_col > self.nonzeros {
            return Err(IceError::invalid(
                "max_nnz_per_col",
                "exceeds nonzero count",
            ));
        }
        if let Some(beta) = self.block_dim {
            if beta == 0 || beta > self.rows {
                return Err(IceError::invalid(
                    "block_dim",
                    format!("{beta} is outside [1, {}]", self.rows),
                ));
            }
        }
        Ok(())
    }

    /// Block dimension used by CSB: the explicit one, else ceil(sqrt(n)).
    pub fn effective_block_dim(&self) -> u64 {
        self.block_dim
            .unwrap_or_else(|| default_block_dim(self.rows))
    }
}

pub fn default_block_dim(rows: u64) -> u64 {
    ((rows as f64).sqrt().ceil() as u64).clamp(1, rows.max(1))
}

/// Dense product of an `n`×`m` and an `m`×`p` matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DenseInput {
    pub n: u64,
    pub m: u64,
    pub p: u64,
}

impl DenseInput {
    pub fn new(n: u64, m: u64, p: u64) -> Result<Self> {
        for (field, v) in [("n", n), ("m", m), ("p", p)] {
            if v == 0 {
                return Err(IceError::invalid(field, "must be positive"));
            }
        }
        Ok(DenseInput { n, m, p })
    }

    pub fn square(n: u64) -> Result<Self> {
        Self::new(n, n, n)
    }
}

impl fmt::Display for DenseInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.n, self.m, self.p)
    }
}

/// Work and span in flops, I/O in cache-line transfers.
///
/// Construction enforces `work >= span >= 1`, so every span/work ratio taken
/// downstream is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ComplexityTriple {
    work: u64,
    span: u64,
    io: u64,
}

impl ComplexityTriple {
    pub fn new(work: u64, span: u64, io: u64) -> Result<Self> {
        if work == 0 {
            return Err(IceError::UndefinedRatio);
        }
        if span == 0 || span > work {
            return Err(IceError::InvalidTriple { work, span });
        }
        Ok(ComplexityTriple { work, span, io })
    }

    pub fn work(&self) -> u64 {
        self.work
    }

    pub fn span(&self) -> u64 {
        self.span
    }

    pub fn io(&self) -> u64 {
        self.io
    }

    pub fn parallelism(&self) -> f64 {
        self.work as f64 / self.span as f64
    }

    /// Builds a triple from real-valued terms, rounding each up. A span
    /// above work (possible only for tiny inputs, where the additive log
    /// term dominates) is capped at work.
    fn from_reals(work: f64, span: f64, io: f64) -> Result<Self> {
        let work = round_up(work);
        let span = round_up(span).clamp(1, work.max(1));
        Self::new(work, span, round_up(io))
    }
}

impl fmt::Display for ComplexityTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(work={}, span={}, io={})",
            self.work, self.span, self.io
        )
    }
}

fn round_up(x: f64) -> u64 {
    // a product like n * (1/n) can land one ulp above an integer
    let r = x.round();
    if (x - r).abs() <= 8.0 * f64::EPSILON * x.abs().max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

fn ceil_log2(x: f64) -> f64 {
    if x <= 1.0 {
        0.0
    } else {
        let l = x.log2();
        let r = l.round();
        if (l - r).abs() < 1e-12 {
            r
        } else {
            l.ceil()
        }
    }
}

fn spmv_guard(input: &SparseInput) -> Result<()> {
    input.validate()?;
    if input.rows < 2 {
        return Err(IceError::DegenerateInput(format!(
            "n = {} rows; the log n reduction term needs n >= 2",
            input.rows
        )));
    }
    if input.nonzeros == 0 {
        return Err(IceError::DegenerateInput("matrix has no nonzeros".into()));
    }
    Ok(())
}

/// Row-parallel SpMV: streams A, reads `x` at random.
pub fn csr_complexity(input: &SparseInput) -> Result<ComplexityTriple> {
    spmv_guard(input)?;
    let nr = input
        .max_nnz_per_row
        .ok_or(IceError::MissingDescriptor("max_nnz_per_row"))?;
    let nz = input.nonzeros as f64;
    ComplexityTriple::from_reals(nz, nr as f64 + ceil_log2(input.rows as f64), nz)
}

/// Column-parallel SpMV: streams A, updates `y` at random.
pub fn csc_complexity(input: &SparseInput) -> Result<ComplexityTriple> {
    spmv_guard(input)?;
    let nz = input.nonzeros as f64;
    let nc = input.max_nnz_per_col as f64;
    ComplexityTriple::from_reals(nz, nc + ceil_log2(input.rows as f64), nz)
}

/// Compressed sparse blocks with β×β blocks; nonzeros inside a block are in
/// Z-Morton order, so they stream at one transfer per line.
pub fn csb_complexity(input: &SparseInput, cacheline_elements: u64) -> Result<ComplexityTriple> {
    input.validate()?;
    if cacheline_elements == 0 {
        return Err(IceError::invalid("cacheline_elements", "must be positive"));
    }
    if input.nonzeros == 0 {
        return Err(IceError::DegenerateInput("matrix has no nonzeros".into()));
    }
    let n = input.rows as f64;
    let beta = input.effective_block_dim() as f64;
    let nz = input.nonzeros as f64;
    let block_count = (n / beta).powi(2);
    let work = block_count + nz;
    let io = block_count + nz / cacheline_elements as f64;
    let span = beta * ceil_log2(n / beta) + n / beta;
    ComplexityTriple::from_reals(work, span, io)
}

/// Row-partitioned triple loop; B is streamed once per row of A.
pub fn basic_matmul_complexity(
    input: &DenseInput,
    cacheline_elements: u64,
    core_count: u32,
) -> Result<ComplexityTriple> {
    let DenseInput { n, m, p } = DenseInput::new(input.n, input.m, input.p)?;
    if cacheline_elements == 0 {
        return Err(IceError::invalid("cacheline_elements", "must be positive"));
    }
    if core_count == 0 {
        return Err(IceError::invalid("core_count", "must be positive"));
    }
    let (n, m, p) = (n as f64, m as f64, p as f64);
    let b = cacheline_elements as f64;
    let work = 2.0 * n * m * p;
    ComplexityTriple::from_reals(
        work,
        work / core_count as f64,
        (n * m + n * m * p + n * p) / b,
    )
}

/// Recursive divide-and-conquer product, row-partitioned across cores.
pub fn co_matmul_complexity(
    input: &DenseInput,
    cacheline_elements: u64,
    private_cache_elements: u64,
    core_count: u32,
) -> Result<ComplexityTriple> {
    let DenseInput { n, m, p } = DenseInput::new(input.n, input.m, input.p)?;
    if cacheline_elements == 0 {
        return Err(IceError::InvalidCacheGeometry(
            "line of zero elements".into(),
        ));
    }
    if (private_cache_elements as u128) < (cacheline_elements as u128).pow(2) {
        return Err(IceError::InvalidCacheGeometry(format!(
            "cache of {private_cache_elements} elements is not tall: needs at least B^2 = {}",
            cacheline_elements * cacheline_elements
        )));
    }
    if core_count == 0 {
        return Err(IceError::invalid("core_count", "must be positive"));
    }
    let (n, m, p) = (n as f64, m as f64, p as f64);
    let b = cacheline_elements as f64;
    let z = private_cache_elements as f64;
    let work = 2.0 * n * m * p;
    let io = n + m + p + (n * m + m * p + n * p) / b + n * m * p / (b * z.sqrt());
    ComplexityTriple::from_reals(work, work / core_count as f64, io)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputKind {
    Sparse,
    Dense,
}

impl InputKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            InputKind::Sparse => "sparse",
            InputKind::Dense => "dense",
        }
    }
}

/// Which execution-time term dominates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundedness {
    CpuBound,
    MemoryBound,
}

impl Boundedness {
    pub fn as_str(&self) -> &'static str {
        match self {
            Boundedness::CpuBound => "cpu-bound",
            Boundedness::MemoryBound => "memory-bound",
        }
    }
}

impl fmt::Display for Boundedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Csr,
    Csc,
    Csb,
    BasicMatmul,
    CoMatmul,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlgorithmModel {
    pub algorithm: Algorithm,
    pub name: &'static str,
    pub kind: InputKind,
    pub boundedness_hint: Boundedness,
}

pub const MODELS: [AlgorithmModel; 5] = [
    AlgorithmModel {
        algorithm: Algorithm::Csr,
        name: "csr",
        kind: InputKind::Sparse,
        boundedness_hint: Boundedness::MemoryBound,
    },
    AlgorithmModel {
        algorithm: Algorithm::Csc,
        name: "csc",
        kind: InputKind::Sparse,
        boundedness_hint: Boundedness::MemoryBound,
    },
    AlgorithmModel {
        algorithm: Algorithm::Csb,
        name: "csb",
        kind: InputKind::Sparse,
        boundedness_hint: Boundedness::MemoryBound,
    },
    AlgorithmModel {
        algorithm: Algorithm::BasicMatmul,
        name: "basic-matmul",
        kind: InputKind::Dense,
        boundedness_hint: Boundedness::CpuBound,
    },
    AlgorithmModel {
        algorithm: Algorithm::CoMatmul,
        name: "co-matmul",
        kind: InputKind::Dense,
        boundedness_hint: Boundedness::CpuBound,
    },
];

impl Algorithm {
    pub fn model(&self) -> &'static AlgorithmModel {
        MODELS
            .iter()
            .find(|m| m.algorithm == *self)
            .expect("every algorithm is registered")
    }

    pub fn name(&self) -> &'static str {
        self.model().name
    }

    pub fn from_name(name: &str) -> Result<Self> {
        let key = crate::normalize_name(name);
        MODELS
            .iter()
            .find(|m| crate::normalize_name(m.name) == key || matches_short(m, &key))
            .map(|m| m.algorithm)
            .ok_or_else(|| IceError::UnknownName {
                kind: "algorithm",
                name: name.to_string(),
                candidates: MODELS.iter().map(|m| m.name.to_string()).collect(),
            })
    }

    /// Evaluates the model, taking B, Z and N from the platform.
    pub fn complexity(
        &self,
        input: &Input,
        platform: &PlatformProfile,
    ) -> Result<ComplexityTriple> {
        match (self, input) {
            (Algorithm::Csr, Input::Sparse(s)) => csr_complexity(s),
            (Algorithm::Csc, Input::Sparse(s)) => csc_complexity(s),
            (Algorithm::Csb, Input::Sparse(s)) => csb_complexity(s, platform.cacheline_elements),
            (Algorithm::BasicMatmul, Input::Dense(d)) => basic_matmul_complexity(
                d,
                platform.cacheline_elements,
                platform.require_core_count()?,
            ),
            (Algorithm::CoMatmul, Input::Dense(d)) => co_matmul_complexity(
                d,
                platform.cacheline_elements,
                platform.private_cache_elements,
                platform.require_core_count()?,
            ),
            (alg, input) => Err(IceError::InputKindMismatch {
                algorithm: alg.name(),
                kind: input.kind().as_str(),
            }),
        }
    }
}

fn matches_short(model: &AlgorithmModel, key: &str) -> bool {
    // "basic" and "co" are accepted for the matmul variants
    model.kind == InputKind::Dense && model.name.strip_suffix("-matmul") == Some(key)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Input {
    Sparse(SparseInput),
    Dense(DenseInput),
}

impl Input {
    pub fn kind(&self) -> InputKind {
        match self {
            Input::Sparse(_) => InputKind::Sparse,
            Input::Dense(_) => InputKind::Dense,
        }
    }
}
