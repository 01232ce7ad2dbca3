//! Reconstruction quality and storage accounting.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

fn check_shapes(x: &DenseTensor, xhat: &DenseTensor) -> Result<()> {
    if x.dims() != xhat.dims() {
        return Err(Error::DimensionMismatch(format!(
            "comparing {:?} with {:?}",
            x.dims(),
            xhat.dims()
        )));
    }
    Ok(())
}

fn squared_distance(x: &DenseTensor, xhat: &DenseTensor) -> f64 {
    x.data()
        .iter()
        .zip(xhat.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// `‖x − x̂‖² / ∏ I_n`.
pub fn mse(x: &DenseTensor, xhat: &DenseTensor) -> Result<f64> {
    check_shapes(x, xhat)?;
    Ok(squared_distance(x, xhat) / x.len() as f64)
}

/// `‖x − x̂‖ / ‖x‖`.
pub fn relative_error(x: &DenseTensor, xhat: &DenseTensor) -> Result<f64> {
    check_shapes(x, xhat)?;
    let norm = x.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(squared_distance(x, xhat).sqrt() / norm)
}

/// `max(max x, max x̂)`.
pub fn peak(x: &DenseTensor, xhat: &DenseTensor) -> f64 {
    x.max_value().max(xhat.max_value())
}

/// `10·log₁₀(peak² / mse)`; `+∞` when `mse == 0`.
pub fn psnr_from_mse(peak: f64, mse: f64) -> f64 {
    if mse == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (peak * peak / mse).log10()
}

/// `10·log₁₀(peak² / √mse)`, the variant with a square root in the denominator.
pub fn psnr_as_printed_from_mse(peak: f64, mse: f64) -> f64 {
    if mse == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (peak * peak / mse.sqrt()).log10()
}

pub fn psnr(x: &DenseTensor, xhat: &DenseTensor) -> Result<f64> {
    Ok(psnr_from_mse(peak(x, xhat), mse(x, xhat)?))
}

/// `(stored / original, 1 − stored / original)`.
pub fn compression_ratio(stored_count: u64, original_count: u64) -> (f64, f64) {
    let stored = stored_count as f64 / original_count as f64;
    (stored, 1.0 - stored)
}

/// Runs `action` and measures its wall time on a monotonic clock.
pub fn timed<T>(action: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = action();
    (out, start.elapsed().as_secs_f64())
}

/// One run's metrics. Both CR directions are always reported.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityReport {
    pub mse: f64,
    pub err: f64,
    /// dB; serialized as `null` when infinite.
    pub psnr: f64,
    pub cr_stored_fraction: f64,
    pub cr_space_savings: f64,
    pub elapsed_seconds: f64,
    pub stored_count: u64,
    pub original_count: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PsnrForm {
    #[default]
    Conventional,
    AsPrinted,
}

impl QualityReport {
    pub fn evaluate(
        x: &DenseTensor,
        xhat: &DenseTensor,
        stored_count: u64,
        elapsed_seconds: f64,
        psnr_form: PsnrForm,
    ) -> Result<Self> {
        let mse = mse(x, xhat)?;
        let err = relative_error(x, xhat)?;
        let peak = peak(x, xhat);
        let psnr = match psnr_form {
            PsnrForm::Conventional => psnr_from_mse(peak, mse),
            PsnrForm::AsPrinted => psnr_as_printed_from_mse(peak, mse),
        };
        let original_count = x.len() as u64;
        let (cr_stored_fraction, cr_space_savings) =
            compression_ratio(stored_count, original_count);
        Ok(Self {
            mse,
            err,
            psnr,
            cr_stored_fraction,
            cr_space_savings,
            elapsed_seconds,
            stored_count,
            original_count,
        })
    }

    /// `key=value` lines.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mse={:.6e}", self.mse);
        let _ = writeln!(s, "err={:.6}", self.err);
        let _ = writeln!(s, "psnr_db={:.3}", self.psnr);
        let _ = writeln!(s, "cr_stored_fraction={:.6}", self.cr_stored_fraction);
        let _ = writeln!(s, "cr_space_savings={:.6}", self.cr_space_savings);
        let _ = writeln!(s, "stored_count={}", self.stored_count);
        let _ = writeln!(s, "original_count={}", self.original_count);
        let _ = writeln!(s, "elapsed_seconds={:.6}", self.elapsed_seconds);
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}
