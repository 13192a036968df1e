//! Energy estimates from a complexity triple and a platform.
//!
//! `E = eps_op * Work + eps_io * IO + max(pi_op * Span, pi_io * IO * Span / Work)`
//!
//! The static term is platform static power times execution time, where
//! execution time is the larger of the compute time (proportional to span)
//! and the memory time (line transfers spread over the available
//! parallelism Work/Span). Multiplying through by static power turns both
//! time terms into the `pi` parameters, which is the form evaluated here.

use std::fmt;

use crate::complexity::{Algorithm, Boundedness, ComplexityTriple, Input};
use crate::error::{IceError, Result};
use crate::platform::{PlatformProfile, RawPlatformConstants};

/// Which static term to charge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BoundMode {
    /// Whichever time proxy is larger.
    #[default]
    Auto,
    /// Always charge `pi_op * Span`.
    Cpu,
    /// Always charge `pi_io * IO * Span / Work`.
    Memory,
}

impl BoundMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundMode::Auto => "auto",
            BoundMode::Cpu => "cpu",
            BoundMode::Memory => "memory",
        }
    }
}

impl fmt::Display for BoundMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BoundMode {
    type Err = IceError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(BoundMode::Auto),
            "cpu" | "cpu-bound" => Ok(BoundMode::Cpu),
            "memory" | "mem" | "memory-bound" => Ok(BoundMode::Memory),
            _ => Err(IceError::UnknownName {
                kind: "bound mode",
                name: s.to_string(),
                candidates: vec!["auto".into(), "cpu".into(), "memory".into()],
            }),
        }
    }
}

/// All terms in nanojoules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyEstimate {
    pub static_energy: f64,
    pub compute_energy: f64,
    pub memory_energy: f64,
    pub total: f64,
    pub boundedness: Boundedness,
    /// `pi_op * Span`, proportional to compute time.
    pub compute_time_proxy: f64,
    /// `pi_io * IO * Span / Work`, proportional to memory time.
    pub memory_time_proxy: f64,
}

impl EnergyEstimate {
    fn assemble(
        compute_energy: f64,
        memory_energy: f64,
        compute_time_proxy: f64,
        memory_time_proxy: f64,
        mode: BoundMode,
    ) -> Self {
        let boundedness = match mode {
            BoundMode::Cpu => Boundedness::CpuBound,
            BoundMode::Memory => Boundedness::MemoryBound,
            // ties go to cpu-bound
            BoundMode::Auto if compute_time_proxy >= memory_time_proxy => Boundedness::CpuBound,
            BoundMode::Auto => Boundedness::MemoryBound,
        };
        let static_energy = match boundedness {
            Boundedness::CpuBound => compute_time_proxy,
            Boundedness::MemoryBound => memory_time_proxy,
        };
        EnergyEstimate {
            static_energy,
            compute_energy,
            memory_energy,
            total: static_energy + compute_energy + memory_energy,
            boundedness,
            compute_time_proxy,
            memory_time_proxy,
        }
    }
}

pub fn estimate(triple: &ComplexityTriple, profile: &PlatformProfile) -> EnergyEstimate {
    estimate_with_mode(triple, profile, BoundMode::Auto)
}

/// CPU-bound form: static energy follows the span.
pub fn estimate_cpu_bound(triple: &ComplexityTriple, profile: &PlatformProfile) -> EnergyEstimate {
    estimate_with_mode(triple, profile, BoundMode::Cpu)
}

/// Memory-bound form: static energy follows the line transfers.
pub fn estimate_memory_bound(
    triple: &ComplexityTriple,
    profile: &PlatformProfile,
) -> EnergyEstimate {
    estimate_with_mode(triple, profile, BoundMode::Memory)
}

pub fn estimate_with_mode(
    triple: &ComplexityTriple,
    profile: &PlatformProfile,
    mode: BoundMode,
) -> EnergyEstimate {
    let work = triple.work() as f64;
    let span = triple.span() as f64;
    let io = triple.io() as f64;
    EnergyEstimate::assemble(
        profile.eps_op * work,
        profile.eps_io * io,
        profile.pi_op * span,
        profile.pi_io * io * span / work,
        mode,
    )
}

/// Evaluates the unreduced form `P_sta * max(T_comp, T_mem) + ...` straight
/// from hardware constants, with times in seconds.
pub fn estimate_from_raw(
    triple: &ComplexityTriple,
    raw: &RawPlatformConstants,
    mode: BoundMode,
) -> Result<EnergyEstimate> {
    raw.validate()?;
    let work = triple.work() as f64;
    let span = triple.span() as f64;
    let io = triple.io() as f64;
    let to_nj = 1e9;
    let t_comp = span * raw.cycles_per_op / raw.frequency;
    let t_mem = io * span * raw.cycles_per_cacheline / (work * raw.frequency);
    let op_energy = raw.dynamic_power_per_op * raw.cycles_per_op / raw.frequency;
    let line_energy = raw.dynamic_power_per_io * raw.cycles_per_cacheline / raw.frequency;
    Ok(EnergyEstimate::assemble(
        op_energy * work * to_nj,
        line_energy * io * to_nj,
        raw.static_power_whole_platform * t_comp * to_nj,
        raw.static_power_whole_platform * t_mem * to_nj,
        mode,
    ))
}

/// Energy with platform constants dropped: a dimensionless count.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AbstractEnergy(f64);

impl AbstractEnergy {
    pub fn value(&self) -> f64 {
        self.0
    }
}

/// `Work + IO + max(Span, IO * Span / Work)`.
pub fn estimate_platform_independent(triple: &ComplexityTriple) -> AbstractEnergy {
    let work = triple.work() as f64;
    let span = triple.span() as f64;
    let io = triple.io() as f64;
    AbstractEnergy(work + io + span.max(io * span / work))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub algorithm: Algorithm,
    pub triple: ComplexityTriple,
    pub estimate: EnergyEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub a: Evaluation,
    pub b: Evaluation,
    /// `E_a / E_b`.
    pub ratio: f64,
}

pub fn evaluate(
    algorithm: Algorithm,
    input: &Input,
    profile: &PlatformProfile,
    mode: BoundMode,
) -> Result<Evaluation> {
    let triple = algorithm.complexity(input, profile)?;
    Ok(Evaluation {
        algorithm,
        triple,
        estimate: estimate_with_mode(&triple, profile, mode),
    })
}

/// Ratio of the energies of two algorithms on the same input and platform.
pub fn compare(
    a: Algorithm,
    b: Algorithm,
    input: &Input,
    profile: &PlatformProfile,
    mode: BoundMode,
) -> Result<Comparison> {
    let a = evaluate(a, input, profile, mode)?;
    let b = evaluate(b, input, profile, mode)?;
    if b.estimate.total == 0.0 {
        return Err(IceError::DivisionByZero);
    }
    Ok(Comparison {
        ratio: a.estimate.total / b.estimate.total,
        a,
        b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexity::{builtin_matrix_catalog, find_matrix, DenseInput};
    use crate::platform::{builtin_catalog, find_platform, IceParameters};
    use approx::assert_relative_eq;

    fn xeon() -> PlatformProfile {
        find_platform(&builtin_catalog(), "xeon").unwrap().clone()
    }

    fn triple(w: u64, s: u64, io: u64) -> ComplexityTriple {
        ComplexityTriple::new(w, s, io).unwrap()
    }

    #[test]
    fn serial_without_io_is_cpu_bound() {
        let p = xeon();
        let e = estimate(&triple(1000, 1000, 0), &p);
        assert_eq!(e.boundedness, Boundedness::CpuBound);
        assert_relative_eq!(e.total, (p.eps_op + p.pi_op) * 1000.0, max_relative = 1e-12);
        let m = estimate_memory_bound(&triple(1000, 1000, 0), &p);
        assert_eq!(m.static_energy, 0.0);
        assert_relative_eq!(m.total, p.eps_op * 1000.0, max_relative = 1e-12);
    }

    #[test]
    fn csc_torso1_on_xeon() {
        let e = estimate(&triple(8_516_500, 1217, 8_516_500), &xeon());
        assert_relative_eq!(e.compute_energy, 2.240e6, max_relative = 1e-3);
        assert_relative_eq!(e.memory_energy, 7.546e7, max_relative = 1e-3);
        assert_relative_eq!(e.static_energy, 2.834e4, max_relative = 1e-3);
        assert_relative_eq!(e.total, 7.772e7, max_relative = 1e-3);
        assert_eq!(e.boundedness, Boundedness::MemoryBound);
        assert_eq!(
            e,
            estimate_memory_bound(&triple(8_516_500, 1217, 8_516_500), &xeon())
        );
    }

    #[test]
    fn csb_torso1_on_xeon() {
        let e = estimate(&triple(8_632_536, 3410, 1_180_598), &xeon());
        assert_relative_eq!(e.total, 1.273e7, max_relative = 1e-3);
        assert_eq!(e.boundedness, Boundedness::MemoryBound);
    }

    #[test]
    fn matmul_cpu_bound_totals() {
        let p = xeon();
        let basic = estimate_cpu_bound(&triple(2_147_483_648, 89_478_486, 134_479_872), &p);
        assert_relative_eq!(basic.total, 1.764e9, max_relative = 2e-3);
        let co = estimate_cpu_bound(&triple(2_147_483_648, 89_478_486, 1_137_744), &p);
        assert_relative_eq!(co.total, 5.846e8, max_relative = 1e-3);
        assert_eq!(
            co,
            estimate(&triple(2_147_483_648, 89_478_486, 1_137_744), &p)
        );
    }

    #[test]
    fn csc_bone010_on_xeon_phi() {
        let phi = find_platform(&builtin_catalog(), "XeonPhi-31S1P")
            .unwrap()
            .clone();
        let (nz, span) = (47_851_783.0, 83.0);
        let hand = 0.006 * nz + 25.02 * nz + 64.40 * nz * span / nz;
        let e = estimate_memory_bound(&triple(47_851_783, 83, 47_851_783), &phi);
        assert_relative_eq!(e.total, hand, max_relative = 1e-12);
    }

    #[test]
    fn ties_classify_as_cpu_bound() {
        let p = PlatformProfile::new(
            "t",
            "t",
            IceParameters {
                eps_op: 1.0,
                eps_io: 1.0,
                pi_op: 2.0,
                pi_io: 2.0,
            },
        )
        .unwrap();
        // pi_op * span == pi_io * io * span / work when io == work
        let e = estimate(&triple(10, 5, 10), &p);
        assert_eq!(e.compute_time_proxy, e.memory_time_proxy);
        assert_eq!(e.boundedness, Boundedness::CpuBound);
    }

    #[test]
    fn platform_independent_values() {
        assert_eq!(estimate_platform_independent(&triple(1, 1, 0)).value(), 2.0);
        assert_eq!(
            estimate_platform_independent(&triple(100, 10, 1000)).value(),
            1200.0
        );
        assert_eq!(
            estimate_platform_independent(&triple(8_516_500, 1217, 8_516_500)).value(),
            17_034_217.0
        );
    }

    #[test]
    fn comparisons() {
        let p = xeon();
        let torso = Input::Sparse(
            find_matrix(&builtin_matrix_catalog(), "torso1")
                .unwrap()
                .input,
        );
        let same = compare(Algorithm::Csc, Algorithm::Csc, &torso, &p, BoundMode::Auto).unwrap();
        assert_eq!(same.ratio, 1.0);
        let spmv = compare(
            Algorithm::Csc,
            Algorithm::Csb,
            &torso,
            &p,
            BoundMode::Memory,
        )
        .unwrap();
        assert_relative_eq!(spmv.ratio, 6.1, max_relative = 5e-3);
        let dense = Input::Dense(DenseInput::square(1024).unwrap());
        let mm = compare(
            Algorithm::BasicMatmul,
            Algorithm::CoMatmul,
            &dense,
            &p,
            BoundMode::Cpu,
        )
        .unwrap();
        assert_relative_eq!(mm.ratio, 3.0, max_relative = 1e-2);
    }

    #[test]
    fn matmul_needs_core_count() {
        let nehalem = find_platform(&builtin_catalog(), "nehalem-i7-950")
            .unwrap()
            .clone();
        let dense = Input::Dense(DenseInput::square(1024).unwrap());
        assert!(matches!(
            evaluate(Algorithm::BasicMatmul, &dense, &nehalem, BoundMode::Cpu),
            Err(IceError::NeedsCoreCount(_))
        ));
    }

    #[test]
    fn bound_mode_parsing() {
        assert_eq!("memory".parse::<BoundMode>().unwrap(), BoundMode::Memory);
        assert_eq!("CPU".parse::<BoundMode>().unwrap(), BoundMode::Cpu);
        assert!("fast".parse::<BoundMode>().is_err());
    }
}
