//! Truncated HOSVD and Tucker reconstruction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::svd::{direct_left_singular_vectors, leading_eigenvectors, SpectralResult};
use crate::tensor::{DenseTensor, Matrix};

/// How per-mode factors are obtained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorMethod {
    /// Eigenvectors of `X_(n) X_(n)ᵀ`.
    #[default]
    Gram,
    /// Left singular vectors from an SVD of `X_(n)` itself.
    Direct,
}

/// Orthonormal factor matrices plus a dense core.
#[derive(Debug, Clone, PartialEq)]
pub struct TuckerFactors {
    pub factors: Vec<Matrix>,
    pub core: DenseTensor,
}

impl TuckerFactors {
    pub fn new(factors: Vec<Matrix>, core: DenseTensor) -> Result<Self> {
        if factors.len() != core.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} factors for a core of order {}",
                factors.len(),
                core.order()
            )));
        }
        for (n, (u, &r)) in factors.iter().zip(core.dims()).enumerate() {
            if u.cols() != r {
                return Err(Error::DimensionMismatch(format!(
                    "factor {n} has {} columns, core mode {n} has size {r}",
                    u.cols()
                )));
            }
        }
        Ok(Self { factors, core })
    }

    pub fn ranks(&self) -> &[usize] {
        self.core.dims()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(Matrix::rows).collect()
    }

    /// Stored real numbers: `Σ I_n·r_n + ∏ r_n`.
    pub fn storage_cost(&self) -> u64 {
        hosvd_storage_cost(&self.dims(), self.ranks())
    }
}

/// Leading factor of one mode, keeping the full spectrum of values computed.
pub(crate) fn mode_factor(
    t: &DenseTensor,
    mode: usize,
    k: usize,
    method: FactorMethod,
) -> Result<SpectralResult> {
    match method {
        FactorMethod::Gram => leading_eigenvectors(&t.mode_gram(mode)?, k),
        FactorMethod::Direct => direct_left_singular_vectors(&t.unfold(mode)?, k),
    }
}

/// Factors for every mode; modes are independent and may run in parallel.
pub(crate) fn all_mode_factors(
    t: &DenseTensor,
    ranks: &[usize],
    method: FactorMethod,
) -> Result<Vec<Matrix>> {
    (0..t.order())
        .into_par_iter()
        .map(|mode| mode_factor(t, mode, ranks[mode], method).map(|s| s.vectors))
        .collect()
}

/// `t ×₁ U⁽¹⁾ᵀ ×₂ … ×_N U⁽ᴺ⁾ᵀ`.
pub fn project_core(t: &DenseTensor, factors: &[Matrix]) -> Result<DenseTensor> {
    let mut core = t.clone();
    for (mode, u) in factors.iter().enumerate() {
        core = core.mode_n_product(&u.transpose(), mode)?;
    }
    Ok(core)
}

/// Truncated HOSVD with Gram-route factors.
pub fn t_hosvd(t: &DenseTensor, ranks: &[usize]) -> Result<TuckerFactors> {
    t_hosvd_with(t, ranks, FactorMethod::Gram)
}

pub fn t_hosvd_with(
    t: &DenseTensor,
    ranks: &[usize],
    method: FactorMethod,
) -> Result<TuckerFactors> {
    if ranks.len() != t.order() {
        return Err(Error::DimensionMismatch(format!(
            "{} ranks for a tensor of order {}",
            ranks.len(),
            t.order()
        )));
    }
    for (mode, (&r, &dim)) in ranks.iter().zip(t.dims()).enumerate() {
        if r == 0 || r > dim {
            return Err(Error::RankOutOfRange { mode, rank: r, dim });
        }
    }
    let factors = all_mode_factors(t, ranks, method)?;
    let core = project_core(t, &factors)?;
    TuckerFactors::new(factors, core)
}

/// `𝒢 ×₁ U⁽¹⁾ ×₂ … ×_N U⁽ᴺ⁾`.
pub fn reconstruct(f: &TuckerFactors) -> Result<DenseTensor> {
    let mut out = f.core.clone();
    for (mode, u) in f.factors.iter().enumerate() {
        out = out.mode_n_product(u, mode)?;
    }
    Ok(out)
}

/// `Σ I_n·r_n + ∏ r_n`.
pub fn hosvd_storage_cost(dims: &[usize], ranks: &[usize]) -> u64 {
    let factors: u64 = dims
        .iter()
        .zip(ranks)
        .map(|(&d, &r)| d as u64 * r as u64)
        .sum();
    let core: u64 = ranks.iter().map(|&r| r as u64).product();
    factors + core
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn storage_cost_examples() {
        assert_eq!(hosvd_storage_cost(&[880, 1240, 3], &[200, 200, 3]), 544_009);
        assert_eq!(
            hosvd_storage_cost(&[1792, 2560, 3], &[100, 100, 3]),
            465_209
        );
        assert_eq!(hosvd_storage_cost(&[2, 2, 2], &[2, 2, 2]), 20);
    }

    #[test]
    fn identity_factors_reproduce_core() {
        let t =
            DenseTensor::from_fn(vec![2, 3, 2], |i| (i[0] + 2 * i[1] + 5 * i[2]) as f64).unwrap();
        let f = TuckerFactors::new(
            vec![
                Matrix::identity(2),
                Matrix::identity(3),
                Matrix::identity(2),
            ],
            t.clone(),
        )
        .unwrap();
        assert_eq!(reconstruct(&f).unwrap(), t);
    }

    #[test]
    fn rank_validation() {
        let t = DenseTensor::zeros(vec![2, 3]).unwrap();
        assert!(matches!(
            t_hosvd(&t, &[2, 4]),
            Err(Error::RankOutOfRange {
                mode: 1,
                rank: 4,
                dim: 3
            })
        ));
        assert!(t_hosvd(&t, &[0, 1]).is_err());
        assert!(t_hosvd(&t, &[1]).is_err());
    }

    #[test]
    fn factor_shape_validation() {
        let core = DenseTensor::zeros(vec![2, 2]).unwrap();
        assert!(TuckerFactors::new(vec![Matrix::identity(2)], core.clone()).is_err());
        assert!(TuckerFactors::new(vec![Matrix::identity(2), Matrix::zeros(3, 1)], core).is_err());
    }
}
