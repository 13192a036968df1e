//! Least-squares calibration of energy parameters from measurements.
//!
//! Each sample is one run of some workload: how many flops and line
//! transfers it performed, how long it took and how much energy it used.
//! The model is `energy = eps_op * work + eps_io * io + static_power * duration`.

use nalgebra::{DMatrix, DVector};

use crate::error::{IceError, Result};

const MIN_SAMPLES: usize = 3;
const RANK_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSample {
    /// Flops.
    pub work: f64,
    /// Cache-line transfers.
    pub io: f64,
    /// Seconds.
    pub duration: f64,
    /// Joules.
    pub energy: f64,
}

impl MeasurementSample {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("work", self.work),
            ("io", self.io),
            ("energy", self.energy),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(IceError::invalid(
                    field,
                    format!("must be non-negative, got {v}"),
                ));
            }
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(IceError::invalid(
                "duration",
                format!("must be positive, got {}", self.duration),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    /// nJ per flop.
    pub eps_op: f64,
    /// nJ per cache-line transfer.
    pub eps_io: f64,
    /// Watts.
    pub static_power: f64,
    /// Residual sum of squares, J².
    pub residual_sum_squares: f64,
}

/// Ordinary least squares over (work, io, duration) with no intercept and
/// no regularization.
pub fn fit_parameters(samples: &[MeasurementSample]) -> Result<FitResult> {
    if samples.len() < MIN_SAMPLES {
        return Err(IceError::InsufficientData {
            got: samples.len(),
            need: MIN_SAMPLES,
        });
    }
    for s in samples {
        s.validate()?;
    }

    let rows = samples.len();
    let mut design = DMatrix::from_fn(rows, 3, |r, c| match c {
        0 => samples[r].work,
        1 => samples[r].io,
        _ => samples[r].duration,
    });
    let target = DVector::from_iterator(rows, samples.iter().map(|s| s.energy));

    // Columns differ by many orders of magnitude (flops vs seconds);
    // equilibrate before factoring.
    let mut scale = [1.0f64; 3];
    for (c, s) in scale.iter_mut().enumerate() {
        let norm = design.column(c).norm();
        if norm == 0.0 {
            return Err(IceError::DegenerateFit {
                rank: rank_of(&design),
            });
        }
        *s = norm;
        design.column_mut(c).unscale_mut(norm);
    }

    let svd = design.clone().svd(true, true);
    let max_sv = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > RANK_RTOL * max_sv)
        .count();
    if rank < 3 {
        return Err(IceError::DegenerateFit { rank });
    }
    let scaled_coef = svd
        .solve(&target, RANK_RTOL * max_sv)
        .map_err(|_| IceError::DegenerateFit { rank })?;
    let residual = &target - &design * &scaled_coef;

    let coef: Vec<f64> = scaled_coef.iter().zip(scale).map(|(c, s)| c / s).collect();
    Ok(FitResult {
        eps_op: coef[0] * 1e9,
        eps_io: coef[1] * 1e9,
        static_power: coef[2],
        residual_sum_squares: residual.norm_squared(),
    })
}

fn rank_of(design: &DMatrix<f64>) -> usize {
    design.clone().svd(false, false).rank(RANK_RTOL)
}
