//! Trace-driven simulation of the ideal cache (one core, one cache) and the
//! ideal distributed cache (one private cache per core, no interference).
//!
//! Replacement is LRU, the usual online stand-in for optimal replacement;
//! it is within a constant factor of optimal given a constant-factor larger
//! cache. Addresses are element indices and map to lines by integer
//! division by the line size.

mod kernels;
mod lru;
mod morton;

pub use kernels::{
    trace_basic_matmul, trace_co_matmul, trace_csb, trace_csc, trace_csr, Layout, SparsePattern,
    TraceOptions, DEFAULT_TRACE_CAP,
};
pub use lru::LruCache;
pub use morton::{morton_decode, morton_encode};

use std::io::{BufRead, Write};

use crate::error::{IceError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Access {
    pub core: u32,
    pub address: u64,
}

/// Accesses in program order, each tagged with the core that issues it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryTrace {
    accesses: Vec<Access>,
    core_count: usize,
}

impl MemoryTrace {
    pub fn new(accesses: Vec<Access>, core_count: usize) -> Result<Self> {
        if accesses.is_empty() {
            return Err(IceError::invalid("accesses", "trace is empty"));
        }
        if core_count == 0 {
            return Err(IceError::invalid("core_count", "must be positive"));
        }
        if let Some(bad) = accesses.iter().find(|a| a.core as usize >= core_count) {
            return Err(IceError::invalid(
                "core",
                format!("core id {} out of range for {core_count} cores", bad.core),
            ));
        }
        Ok(MemoryTrace {
            accesses,
            core_count,
        })
    }

    /// Single-core trace over the given addresses.
    pub fn sequential(addresses: impl IntoIterator<Item = u64>) -> Result<Self> {
        let accesses = addresses
            .into_iter()
            .map(|address| Access { core: 0, address })
            .collect();
        Self::new(accesses, 1)
    }

    pub fn accesses(&self) -> &[Access] {
        &self.accesses
    }

    pub fn core_count(&self) -> usize {
        self.core_count
    }

    pub fn len(&self) -> usize {
        self.accesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accesses.is_empty()
    }

    /// The same accesses in program order, all on core 0.
    pub fn serialized(&self) -> MemoryTrace {
        MemoryTrace {
            accesses: self
                .accesses
                .iter()
                .map(|a| Access {
                    core: 0,
                    address: a.address,
                })
                .collect(),
            core_count: 1,
        }
    }

    /// The subsequence issued by `core`.
    pub fn core_addresses(&self, core: u32) -> impl Iterator<Item = u64> + '_ {
        self.accesses
            .iter()
            .filter(move |a| a.core == core)
            .map(|a| a.address)
    }

    /// Writes one `core_id address` pair per line.
    pub fn write_dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for a in &self.accesses {
            writeln!(out, "{} {}", a.core, a.address)?;
        }
        Ok(())
    }

    /// Reads the dump format back; the core count is one past the largest
    /// core id seen.
    pub fn read_dump<R: BufRead>(input: R) -> Result<Self> {
        let mut accesses = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line.map_err(|e| IceError::Parse(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse_err = || {
                IceError::Parse(format!(
                    "trace line {}: expected `core_id address`",
                    lineno + 1
                ))
            };
            let core = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(parse_err)?;
            let address = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(parse_err)?;
            if parts.next().is_some() {
                return Err(parse_err());
            }
            accesses.push(Access { core, address });
        }
        let cores = accesses
            .iter()
            .map(|a| a.core as usize + 1)
            .max()
            .unwrap_or(1);
        Self::new(accesses, cores)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheGeometry {
    pub capacity_lines: usize,
    pub line_elements: u64,
}

impl CacheGeometry {
    pub fn new(capacity_lines: usize, line_elements: u64) -> Result<Self> {
        if capacity_lines == 0 {
            return Err(IceError::invalid("capacity_lines", "must be at least 1"));
        }
        if line_elements == 0 {
            return Err(IceError::invalid("line_elements", "must be at least 1"));
        }
        Ok(CacheGeometry {
            capacity_lines,
            line_elements,
        })
    }

    /// Geometry for a cache of `cache_elements` elements (rounded down to
    /// whole lines).
    pub fn from_elements(cache_elements: u64, line_elements: u64) -> Result<Self> {
        if line_elements == 0 {
            return Err(IceError::invalid("line_elements", "must be at least 1"));
        }
        Self::new((cache_elements / line_elements) as usize, line_elements)
    }

    pub fn cache_elements(&self) -> u64 {
        self.capacity_lines as u64 * self.line_elements
    }

    pub fn line_of(&self, address: u64) -> u64 {
        address / self.line_elements
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheStats {
    pub misses_total: u64,
    pub misses_per_core: Vec<u64>,
}

fn count_misses(addresses: impl Iterator<Item = u64>, geom: CacheGeometry) -> u64 {
    let mut cache = LruCache::new(geom.capacity_lines);
    addresses
        .filter(|&a| !cache.access(geom.line_of(a)))
        .count() as u64
}

/// Ideal-cache run of a single-core trace.
pub fn simulate_ic(trace: &MemoryTrace, geom: CacheGeometry) -> Result<CacheStats> {
    if trace.core_count() != 1 {
        return Err(IceError::MultiCoreTrace {
            core_count: trace.core_count(),
        });
    }
    Ok(simulate_ic_serialized(trace, geom))
}

/// Ideal-cache run that ignores core ids and keeps program order.
pub fn simulate_ic_serialized(trace: &MemoryTrace, geom: CacheGeometry) -> CacheStats {
    let misses = count_misses(trace.accesses.iter().map(|a| a.address), geom);
    CacheStats {
        misses_total: misses,
        misses_per_core: vec![misses],
    }
}

/// Ideal-distributed-cache run: every core replays its own subsequence
/// through a private cache of the given geometry.
pub fn simulate_idc(trace: &MemoryTrace, geom: CacheGeometry) -> Result<CacheStats> {
    let mut caches: Vec<LruCache> = (0..trace.core_count())
        .map(|_| LruCache::new(geom.capacity_lines))
        .collect();
    let mut misses = vec![0u64; trace.core_count()];
    for a in &trace.accesses {
        let core = a.core as usize;
        if !caches[core].access(geom.line_of(a.address)) {
            misses[core] += 1;
        }
    }
    Ok(CacheStats {
        misses_total: misses.iter().sum(),
        misses_per_core: misses,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lemma1Report {
    /// Total misses over all private caches.
    pub q_p: u64,
    /// Core count times the misses of one cache running the whole trace.
    pub p_times_q1: u64,
    pub holds: bool,
}

impl Lemma1Report {
    /// `q_p / p_times_q1`; 0 when nothing misses.
    pub fn ratio(&self) -> f64 {
        if self.p_times_q1 == 0 {
            0.0
        } else {
            self.q_p as f64 / self.p_times_q1 as f64
        }
    }
}

/// Checks `Q_P <= P * Q_1`, with `Q_1` taken on the program-order
/// serialization of the trace.
pub fn check_lemma1(trace: &MemoryTrace, geom: CacheGeometry) -> Result<Lemma1Report> {
    let q_p = simulate_idc(trace, geom)?.misses_total;
    let q_1 = simulate_ic_serialized(trace, geom).misses_total;
    let p_times_q1 = trace.core_count() as u64 * q_1;
    Ok(Lemma1Report {
        q_p,
        p_times_q1,
        holds: q_p <= p_times_q1,
    })
}
