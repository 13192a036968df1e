//! Pairwise comparison sweeps over inputs × platforms.

use rayon::prelude::*;

use ice_core::complexity::Algorithm;
use ice_core::energy::{compare, BoundMode, Comparison};

use crate::registry::{NamedInput, Registry};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub algorithms: Vec<Algorithm>,
    pub inputs: Vec<String>,
    pub platforms: Vec<String>,
    pub bound_mode: BoundMode,
}

impl SweepSpec {
    /// CSC against CSB over every catalog matrix on the two HPC platforms,
    /// memory-bound.
    pub fn spmv_preset(registry: &Registry) -> Self {
        SweepSpec {
            algorithms: vec![Algorithm::Csc, Algorithm::Csb],
            inputs: registry.matrices.iter().map(|m| m.name.clone()).collect(),
            platforms: vec!["Xeon".into(), "Xeon-Phi".into()],
            bound_mode: BoundMode::Memory,
        }
    }

    /// Basic against cache-oblivious matmul for square sizes 256..2048 on
    /// the two HPC platforms, cpu-bound.
    pub fn matmul_preset() -> Self {
        SweepSpec {
            algorithms: vec![Algorithm::BasicMatmul, Algorithm::CoMatmul],
            inputs: ["256", "512", "1024", "2048"].map(String::from).to_vec(),
            platforms: vec!["Xeon".into(), "Xeon-Phi".into()],
            bound_mode: BoundMode::Cpu,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.algorithms.len() != 2 {
            return Err(CliError::Usage(format!(
                "a comparison needs exactly two algorithms, got {}",
                self.algorithms.len()
            )));
        }
        if self.inputs.is_empty() {
            return Err(CliError::Usage("no inputs given".into()));
        }
        if self.platforms.is_empty() {
            return Err(CliError::Usage("no platforms given".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub input_name: String,
    pub platform_name: String,
    /// nJ.
    pub energy_a: f64,
    /// nJ.
    pub energy_b: f64,
    pub ratio: f64,
    /// Classification of both sides, `a` first; a single word when they agree.
    pub boundedness: String,
    pub comparison: Comparison,
}

/// Evaluates every (input, platform) cell. Rows come back ordered by input,
/// then platform, in the order the sweep lists them.
pub fn run_sweep(spec: &SweepSpec, registry: &Registry) -> Result<Vec<ComparisonRow>, CliError> {
    spec.validate()?;
    let inputs: Vec<NamedInput> = spec
        .inputs
        .iter()
        .map(|name| registry.input(name))
        .collect::<Result<_, _>>()?;
    let platforms = spec
        .platforms
        .iter()
        .map(|name| registry.platform(name))
        .collect::<Result<Vec<_>, _>>()?;
    let cells: Vec<_> = inputs
        .iter()
        .flat_map(|i| platforms.iter().map(move |p| (i, *p)))
        .collect();
    let (a, b) = (spec.algorithms[0], spec.algorithms[1]);
    cells
        .par_iter()
        .map(|(input, platform)| {
            let c = compare(a, b, &input.input, platform, spec.bound_mode)?;
            let (ba, bb) = (c.a.estimate.boundedness, c.b.estimate.boundedness);
            Ok(ComparisonRow {
                input_name: input.name.clone(),
                platform_name: platform.name.clone(),
                energy_a: c.a.estimate.total,
                energy_b: c.b.estimate.total,
                ratio: c.ratio,
                boundedness: if ba == bb {
                    ba.to_string()
                } else {
                    format!("{ba}/{bb}")
                },
                comparison: c,
            })
        })
        .collect()
}

/// `x` rounded to `digits` significant figures, without exponent.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = digits as i32 - 1 - magnitude;
    if decimals >= 0 {
        format!("{x:.*}", decimals as usize)
    } else {
        let scale = 10f64.powi(-decimals);
        format!("{:.0}", (x / scale).round() * scale)
    }
}

pub const CSV_HEADER: &str = "input,platform,energy_a_nJ,energy_b_nJ,ratio,boundedness";

/// Fixed column order, '.' decimals, energies to 0.001 nJ, ratio to four
/// significant figures.
pub fn to_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.3},{:.3},{},{}\n",
            csv_field(&r.input_name),
            csv_field(&r.platform_name),
            r.energy_a,
            r.energy_b,
            format_sig(r.ratio, 4),
            r.boundedness
        ));
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_figures() {
        assert_eq!(format_sig(6.100183, 4), "6.100");
        assert_eq!(format_sig(3.0211, 4), "3.021");
        assert_eq!(format_sig(1.0, 4), "1.000");
        assert_eq!(format_sig(12345.6, 4), "12350");
        assert_eq!(format_sig(0.00123456, 4), "0.001235");
    }

    #[test]
    fn spmv_preset_rows_are_ordered_and_above_one() {
        let reg = Registry::builtin();
        let rows = run_sweep(&SweepSpec::spmv_preset(&reg), &reg).unwrap();
        assert_eq!(rows.len(), 18);
        assert_eq!(rows[0].input_name, "bone010");
        assert_eq!(
            (
                rows[0].platform_name.as_str(),
                rows[1].platform_name.as_str()
            ),
            ("Xeon", "Xeon-Phi")
        );
        for r in &rows {
            assert!(r.ratio > 1.0, "{r:?}");
            assert_eq!(r.ratio, r.energy_a / r.energy_b);
        }
    }

    #[test]
    fn self_comparison_is_exactly_one() {
        let reg = Registry::builtin();
        let mut spec = SweepSpec::matmul_preset();
        spec.algorithms = vec![Algorithm::CoMatmul, Algorithm::CoMatmul];
        for r in run_sweep(&spec, &reg).unwrap() {
            assert_eq!(r.ratio, 1.0);
        }
    }

    #[test]
    fn spec_needs_two_algorithms() {
        let reg = Registry::builtin();
        let mut spec = SweepSpec::spmv_preset(&reg);
        spec.algorithms.pop();
        assert!(matches!(run_sweep(&spec, &reg), Err(CliError::Usage(_))));
    }

    #[test]
    fn csv_quotes_awkward_names() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
