//! Element-granularity access traces of the SpMV and matmul kernels.
//!
//! Every array lives in its own address region, far enough apart that no
//! cache line spans two arrays. Parallel traces partition the natural unit
//! of work (rows, columns, block-rows, rows of C) into contiguous chunks,
//! one per core, and list accesses in the order a single core would run the
//! chunks back to back.

use super::morton::morton_encode;
use super::{Access, MemoryTrace};
use crate::complexity::SparseInput;
use crate::error::{IceError, Result};

pub const DEFAULT_TRACE_CAP: usize = 1 << 20;

const REGION_STRIDE: u64 = 1 << 40;

/// Address regions of the arrays a kernel touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Sparse values with their indices, in storage order.
    SparseValues,
    /// Per-block index entries of CSB.
    BlockIndex,
    X,
    Y,
    DenseA,
    DenseB,
    DenseC,
}

impl Layout {
    pub fn base(self) -> u64 {
        let slot = match self {
            Layout::SparseValues => 0,
            Layout::BlockIndex => 1,
            Layout::X => 2,
            Layout::Y => 3,
            Layout::DenseA => 4,
            Layout::DenseB => 5,
            Layout::DenseC => 6,
        };
        slot * REGION_STRIDE
    }

    pub fn at(self, index: u64) -> u64 {
        self.base() + index
    }

    /// Region an address falls in.
    pub fn of(address: u64) -> Option<Layout> {
        const ALL: [Layout; 7] = [
            Layout::SparseValues,
            Layout::BlockIndex,
            Layout::X,
            Layout::Y,
            Layout::DenseA,
            Layout::DenseB,
            Layout::DenseC,
        ];
        ALL.get((address / REGION_STRIDE) as usize).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceOptions {
    pub cores: usize,
    /// Largest trace, in accesses, a generator may produce.
    pub cap: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            cores: 1,
            cap: DEFAULT_TRACE_CAP,
        }
    }
}

impl TraceOptions {
    pub fn with_cores(cores: usize) -> Self {
        TraceOptions {
            cores,
            ..Default::default()
        }
    }

    fn check(&self, accesses: u64) -> Result<()> {
        if self.cores == 0 {
            return Err(IceError::invalid("cores", "must be positive"));
        }
        if accesses > self.cap as u64 {
            return Err(IceError::TraceTooLarge {
                accesses,
                cap: self.cap,
            });
        }
        Ok(())
    }
}

/// Explicit nonzero coordinates of a small sparse matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePattern {
    rows: u32,
    cols: u32,
    /// Sorted row-major, no duplicates.
    entries: Vec<(u32, u32)>,
}

impl SparsePattern {
    pub fn new(rows: u32, cols: u32, coords: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(IceError::invalid("shape", "matrix has a zero dimension"));
        }
        let mut entries: Vec<(u32, u32)> = coords.into_iter().collect();
        if let Some(&(r, c)) = entries.iter().find(|&&(r, c)| r >= rows || c >= cols) {
            return Err(IceError::invalid(
                "coords",
                format!("({r}, {c}) lies outside {rows}x{cols}"),
            ));
        }
        entries.sort_unstable();
        entries.dedup();
        if entries.is_empty() {
            return Err(IceError::invalid("coords", "matrix has no nonzeros"));
        }
        Ok(SparsePattern {
            rows,
            cols,
            entries,
        })
    }

    pub fn identity(n: u32) -> Result<Self> {
        Self::new(n, n, (0..n).map(|i| (i, i)))
    }

    /// Dense all-ones pattern.
    pub fn full(rows: u32, cols: u32) -> Result<Self> {
        Self::new(
            rows,
            cols,
            (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))),
        )
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn nonzeros(&self) -> usize {
        self.entries.len()
    }

    /// Row-major coordinates.
    pub fn entries(&self) -> &[(u32, u32)] {
        &self.entries
    }

    /// Descriptor statistics for the closed-form models.
    pub fn descriptor(&self) -> SparseInput {
        let mut per_row = vec![0u64; self.rows as usize];
        let mut per_col = vec![0u64; self.cols as usize];
        for &(r, c) in &self.entries {
            per_row[r as usize] += 1;
            per_col[c as usize] += 1;
        }
        SparseInput {
            rows: self.rows as u64,
            cols: self.cols as u64,
            nonzeros: self.entries.len() as u64,
            max_nnz_per_row: per_row.iter().copied().max(),
            max_nnz_per_col: per_col.iter().copied().max().unwrap_or(0),
            block_dim: None,
        }
    }
}

fn owner(unit: u64, units: u64, cores: usize) -> u32 {
    (unit * cores as u64 / units.max(1)) as u32
}

struct Emitter {
    accesses: Vec<Access>,
}

impl Emitter {
    fn with_capacity(n: u64) -> Self {
        Emitter {
            accesses: Vec::with_capacity(n as usize),
        }
    }

    fn push(&mut self, core: u32, region: Layout, index: u64) {
        self.accesses.push(Access {
            core,
            address: region.at(index),
        });
    }

    fn finish(self, cores: usize) -> Result<MemoryTrace> {
        MemoryTrace::new(self.accesses, cores)
    }
}

/// Row-major SpMV. For each nonzero: the value stream, then `x[col]`; after
/// each row, the write of `y[row]`.
pub fn trace_csr(matrix: &SparsePattern, opts: &TraceOptions) -> Result<MemoryTrace> {
    let rows = matrix.rows as u64;
    opts.check(2 * matrix.nonzeros() as u64 + rows)?;
    let mut out = Emitter::with_capacity(2 * matrix.nonzeros() as u64 + rows);
    let mut k = 0usize;
    for r in 0..matrix.rows {
        let core = owner(r as u64, rows, opts.cores);
        while k < matrix.entries.len() && matrix.entries[k].0 == r {
            let c = matrix.entries[k].1;
            out.push(core, Layout::SparseValues, k as u64);
            out.push(core, Layout::X, c as u64);
            k += 1;
        }
        out.push(core, Layout::Y, r as u64);
    }
    out.finish(opts.cores)
}

/// Column-major SpMV. For each column: `x[col]`, then per nonzero the value
/// stream and the update of `y[row]`.
pub fn trace_csc(matrix: &SparsePattern, opts: &TraceOptions) -> Result<MemoryTrace> {
    let cols = matrix.cols as u64;
    opts.check(2 * matrix.nonzeros() as u64 + cols)?;
    let mut by_col: Vec<(u32, u32)> = matrix.entries.iter().map(|&(r, c)| (c, r)).collect();
    by_col.sort_unstable();
    let mut out = Emitter::with_capacity(2 * matrix.nonzeros() as u64 + cols);
    let mut k = 0usize;
    for c in 0..matrix.cols {
        let core = owner(c as u64, cols, opts.cores);
        out.push(core, Layout::X, c as u64);
        while k < by_col.len() && by_col[k].0 == c {
            out.push(core, Layout::SparseValues, k as u64);
            out.push(core, Layout::Y, by_col[k].1 as u64);
            k += 1;
        }
    }
    out.finish(opts.cores)
}

/// Compressed sparse blocks with `beta`×`beta` blocks. Block-rows run in
/// order; every block (empty or not) reads its index entry, then its
/// nonzeros in Z-Morton order, each touching the value stream, `x[col]` and
/// `y[row]`.
pub fn trace_csb(matrix: &SparsePattern, beta: u32, opts: &TraceOptions) -> Result<MemoryTrace> {
    if beta == 0 || beta > matrix.rows {
        return Err(IceError::invalid(
            "block_dim",
            format!("{beta} is outside [1, {}]", matrix.rows),
        ));
    }
    let block_rows = matrix.rows.div_ceil(beta) as u64;
    let block_cols = matrix.cols.div_ceil(beta) as u64;
    let total = block_rows * block_cols + 3 * matrix.nonzeros() as u64;
    opts.check(total)?;

    // (block row, block col, morton key of the in-block offset, row, col)
    let mut keyed: Vec<(u64, u64, u64, u32, u32)> = matrix
        .entries
        .iter()
        .map(|&(r, c)| {
            let (br, bc) = ((r / beta) as u64, (c / beta) as u64);
            (br, bc, morton_encode(r % beta, c % beta), r, c)
        })
        .collect();
    keyed.sort_unstable();

    let mut out = Emitter::with_capacity(total);
    let mut k = 0usize;
    for br in 0..block_rows {
        let core = owner(br, block_rows, opts.cores);
        for bc in 0..block_cols {
            out.push(core, Layout::BlockIndex, br * block_cols + bc);
            while k < keyed.len() && keyed[k].0 == br && keyed[k].1 == bc {
                let (_, _, _, r, c) = keyed[k];
                out.push(core, Layout::SparseValues, k as u64);
                out.push(core, Layout::X, c as u64);
                out.push(core, Layout::Y, r as u64);
                k += 1;
            }
        }
    }
    out.finish(opts.cores)
}

fn matmul_accesses(n: u64, m: u64, p: u64) -> Result<u64> {
    if n == 0 || m == 0 || p == 0 {
        return Err(IceError::invalid("shape", "matrix dimension is zero"));
    }
    Ok(3u64.saturating_mul(n).saturating_mul(m).saturating_mul(p))
}

/// Row-major triple loop in i-k-j order: each row of C is accumulated from
/// a full pass over B. Rows of A and C are split across cores.
pub fn trace_basic_matmul(n: u64, m: u64, p: u64, opts: &TraceOptions) -> Result<MemoryTrace> {
    let total = matmul_accesses(n, m, p)?;
    opts.check(total)?;
    let mut out = Emitter::with_capacity(total);
    for i in 0..n {
        let core = owner(i, n, opts.cores);
        for k in 0..m {
            for j in 0..p {
                out.push(core, Layout::DenseA, i * m + k);
                out.push(core, Layout::DenseB, k * p + j);
                out.push(core, Layout::DenseC, i * p + j);
            }
        }
    }
    out.finish(opts.cores)
}

struct Recursion<'a> {
    out: &'a mut Emitter,
    core: u32,
    m: u64,
    p: u64,
}

impl Recursion<'_> {
    // half-open ranges over rows of A (i), the shared dimension (k) and
    // columns of B (j)
    fn run(&mut self, i: (u64, u64), k: (u64, u64), j: (u64, u64)) {
        let (ni, nk, nj) = (i.1 - i.0, k.1 - k.0, j.1 - j.0);
        if ni == 1 && nk == 1 && nj == 1 {
            self.out.push(self.core, Layout::DenseA, i.0 * self.m + k.0);
            self.out.push(self.core, Layout::DenseB, k.0 * self.p + j.0);
            self.out.push(self.core, Layout::DenseC, i.0 * self.p + j.0);
            return;
        }
        if ni >= nk && ni >= nj {
            let mid = i.0 + ni / 2;
            self.run((i.0, mid), k, j);
            self.run((mid, i.1), k, j);
        } else if nk >= nj {
            let mid = k.0 + nk / 2;
            self.run(i, (k.0, mid), j);
            self.run(i, (mid, k.1), j);
        } else {
            let mid = j.0 + nj / 2;
            self.run(i, k, (j.0, mid));
            self.run(i, k, (mid, j.1));
        }
    }
}

/// Cache-oblivious divide and conquer: halve the largest of the three
/// dimensions until a single multiply-add remains. With several cores each
/// takes a contiguous band of rows of A and C and recurses on it.
pub fn trace_co_matmul(n: u64, m: u64, p: u64, opts: &TraceOptions) -> Result<MemoryTrace> {
    let total = matmul_accesses(n, m, p)?;
    opts.check(total)?;
    let mut out = Emitter::with_capacity(total);
    let cores = opts.cores as u64;
    for core in 0..cores.min(n) {
        let (lo, hi) = (core * n / cores.min(n), (core + 1) * n / cores.min(n));
        if lo == hi {
            continue;
        }
        let owner_core = owner(lo, n, opts.cores);
        Recursion {
            out: &mut out,
            core: owner_core,
            m,
            p,
        }
        .run((lo, hi), (0, m), (0, p));
    }
    out.finish(opts.cores)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regions(t: &MemoryTrace) -> Vec<Layout> {
        t.accesses()
            .iter()
            .map(|a| Layout::of(a.address).unwrap())
            .collect()
    }

    #[test]
    fn csr_one_by_one() {
        let m = SparsePattern::new(1, 1, [(0, 0)]).unwrap();
        let t = trace_csr(&m, &TraceOptions::default()).unwrap();
        assert_eq!(
            regions(&t),
            vec![Layout::SparseValues, Layout::X, Layout::Y]
        );
        let t = trace_csc(&m, &TraceOptions::default()).unwrap();
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn empty_matrix_is_rejected() {
        assert!(SparsePattern::new(3, 3, []).is_err());
        assert!(SparsePattern::new(3, 3, [(3, 0)]).is_err());
    }

    #[test]
    fn basic_matmul_two_cubed() {
        let t = trace_basic_matmul(2, 2, 2, &TraceOptions::default()).unwrap();
        assert_eq!(t.len(), 24);
        let first: Vec<u64> = t.accesses()[..6].iter().map(|a| a.address).collect();
        // i=0,k=0,j=0 then i=0,k=0,j=1
        assert_eq!(
            first,
            vec![
                Layout::DenseA.at(0),
                Layout::DenseB.at(0),
                Layout::DenseC.at(0),
                Layout::DenseA.at(0),
                Layout::DenseB.at(1),
                Layout::DenseC.at(1),
            ]
        );
    }

    #[test]
    fn co_matmul_visits_every_product_once() {
        let (n, m, p) = (5u64, 3u64, 6u64);
        let t = trace_co_matmul(n, m, p, &TraceOptions::with_cores(2)).unwrap();
        let mut triples: Vec<(u64, u64, u64)> = t
            .accesses()
            .chunks(3)
            .map(|c| {
                let a = c[0].address - Layout::DenseA.base();
                let b = c[1].address - Layout::DenseB.base();
                let cc = c[2].address - Layout::DenseC.base();
                let (i, k, j) = (a / m, a % m, b % p);
                assert_eq!(b / p, k);
                assert_eq!(cc, i * p + j);
                (i, k, j)
            })
            .collect();
        triples.sort_unstable();
        let expect: Vec<_> = (0..n)
            .flat_map(|i| (0..m).flat_map(move |k| (0..p).map(move |j| (i, k, j))))
            .collect();
        assert_eq!(triples, expect);
        assert_eq!(t.core_count(), 2);
    }

    #[test]
    fn csb_nonzeros_follow_morton_order_within_blocks() {
        let m = SparsePattern::full(4, 4).unwrap();
        let t = trace_csb(&m, 4, &TraceOptions::default()).unwrap();
        // one block: index entry then 16 (value, x, y) triples
        assert_eq!(t.len(), 1 + 48);
        let coords: Vec<(u64, u64)> = t.accesses()[1..]
            .chunks(3)
            .map(|c| {
                (
                    c[2].address - Layout::Y.base(),
                    c[1].address - Layout::X.base(),
                )
            })
            .collect();
        assert_eq!(&coords[..4], &[(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert_eq!(coords[4], (0, 2));
    }

    #[test]
    fn csb_rejects_bad_block_dim() {
        let m = SparsePattern::identity(4).unwrap();
        assert!(trace_csb(&m, 0, &TraceOptions::default()).is_err());
        assert!(trace_csb(&m, 5, &TraceOptions::default()).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let opts = TraceOptions { cores: 1, cap: 100 };
        assert!(matches!(
            trace_basic_matmul(4, 4, 4, &opts),
            Err(IceError::TraceTooLarge {
                accesses: 192,
                cap: 100
            })
        ));
        assert!(trace_co_matmul(64, 64, 64, &TraceOptions::default()).is_ok());
        assert!(trace_co_matmul(128, 64, 64, &TraceOptions::default()).is_err());
    }

    #[test]
    fn cores_partition_rows() {
        let m = SparsePattern::identity(8).unwrap();
        let t = trace_csr(&m, &TraceOptions::with_cores(4)).unwrap();
        let cores: Vec<u32> = t.accesses().iter().map(|a| a.core).collect();
        assert_eq!(&cores[..6], &[0, 0, 0, 0, 0, 0]);
        assert_eq!(*cores.last().unwrap(), 3);
    }

    #[test]
    fn descriptor_counts() {
        let m = SparsePattern::new(3, 4, [(0, 0), (0, 3), (2, 3), (1, 3)]).unwrap();
        let d = m.descriptor();
        assert_eq!(
            (
                d.rows,
                d.cols,
                d.nonzeros,
                d.max_nnz_per_row,
                d.max_nnz_per_col
            ),
            (3, 4, 4, Some(2), 3)
        );
    }
}
