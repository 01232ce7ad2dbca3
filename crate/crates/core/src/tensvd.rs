//! Compression by balanced reshape, full orthonormal factors and a sparse core.
//!
//! Pipeline:
//!
//! 1. reshape `𝒳 (I₁…I_N)` into a near-hypercubic `𝒵 (J₁…J_M)` ([`crate::reshape`]);
//! 2. take the full `J_m × J_m` eigenbasis of every Gram matrix `Z_(m) Z_(m)ᵀ`;
//! 3. project to the core `𝒢 = 𝒵 ×₁ U⁽¹⁾ᵀ … ×_M U⁽ᴹ⁾ᵀ`;
//! 4. keep the largest-magnitude core entries (value and linear position) until
//!    the error or storage target is met.
//!
//! With square orthonormal factors `‖𝒵‖ = ‖𝒢‖`, and zeroing a set of core entries
//! costs exactly their energy, so
//! `ERR² = 1 − Σ_selected g² / ‖𝒢‖²`. The ε stopping rule is stated in that
//! energy form. Each stored core entry costs two numbers (value and position).

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hosvd::{all_mode_factors, project_core, FactorMethod};
use crate::reshape::{inverse_remap, plan_shape, remap, ReshapePlan};
use crate::tensor::{DenseTensor, Matrix};

/// Either an accuracy or a storage budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CompressionTarget {
    /// Relative Frobenius error bound `ε`.
    Epsilon(f64),
    /// Stored element count divided by original element count.
    StoredFraction(f64),
}

impl CompressionTarget {
    pub fn epsilon(eps: f64) -> Result<Self> {
        Self::Epsilon(eps).validated()
    }

    pub fn stored_fraction(com: f64) -> Result<Self> {
        Self::StoredFraction(com).validated()
    }

    pub fn validated(self) -> Result<Self> {
        let v = match self {
            Self::Epsilon(v) | Self::StoredFraction(v) => v,
        };
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InvalidTarget(format!(
                "{self:?}: value must lie strictly between 0 and 1"
            )));
        }
        Ok(self)
    }
}

/// Retained core coefficients in decreasing magnitude order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseCore {
    /// Column-major linear indices into the reshaped core.
    pub positions: Vec<u64>,
    pub values: Vec<f64>,
}

impl SparseCore {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Checks uniqueness, bounds and magnitude ordering.
    pub fn validate(&self, core_size: usize) -> Result<()> {
        if self.positions.len() != self.values.len() {
            return Err(Error::InvalidCompressed(format!(
                "{} positions for {} values",
                self.positions.len(),
                self.values.len()
            )));
        }
        let mut seen = HashSet::with_capacity(self.positions.len());
        for &p in &self.positions {
            if p >= core_size as u64 {
                return Err(Error::PositionOutOfRange {
                    position: p,
                    size: core_size,
                });
            }
            if !seen.insert(p) {
                return Err(Error::DuplicatePosition(p));
            }
        }
        if self.values.windows(2).any(|w| w[0].abs() < w[1].abs()) {
            return Err(Error::InvalidCompressed(
                "core values are not in non-increasing magnitude order".into(),
            ));
        }
        Ok(())
    }

    /// Scatters into a dense tensor of `dims`.
    pub fn to_dense(&self, dims: &[usize]) -> Result<DenseTensor> {
        let mut core = DenseTensor::zeros(dims.to_vec())?;
        let size = core.len();
        let data = core.data_mut();
        for (&p, &v) in self.positions.iter().zip(&self.values) {
            let slot = data
                .get_mut(p as usize)
                .ok_or(Error::PositionOutOfRange { position: p, size })?;
            *slot = v;
        }
        Ok(core)
    }
}

/// Everything needed to rebuild the original tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedTensor {
    pub plan: ReshapePlan,
    /// Square orthonormal `J_m × J_m` factors.
    pub factors: Vec<Matrix>,
    pub sparse_core: SparseCore,
    /// `‖𝒵‖²`, equal to `‖𝒳‖²`.
    pub total_energy: f64,
    /// `Σ J_m² + 2·K`.
    pub stored_count: u64,
}

impl CompressedTensor {
    pub fn original_count(&self) -> usize {
        self.plan.element_count()
    }

    pub fn stored_fraction(&self) -> f64 {
        self.stored_count as f64 / self.original_count() as f64
    }

    /// Error predicted from core energy alone: `√(1 − selected/total)`.
    pub fn predicted_relative_error(&self) -> f64 {
        if self.total_energy == 0.0 {
            return 0.0;
        }
        (1.0 - self.sparse_core.energy() / self.total_energy)
            .max(0.0)
            .sqrt()
    }

    /// Structural invariants; `orthonormal_tol` bounds `‖UᵀU − I‖_max`.
    pub fn validate(&self, orthonormal_tol: f64) -> Result<()> {
        let dims = self.plan.reshaped_dims();
        if self.factors.len() != dims.len() {
            return Err(Error::InvalidCompressed(format!(
                "{} factors for a reshaped order of {}",
                self.factors.len(),
                dims.len()
            )));
        }
        for (m, (u, &j)) in self.factors.iter().zip(dims).enumerate() {
            if u.rows() != j || u.cols() != j {
                return Err(Error::InvalidCompressed(format!(
                    "factor {m} is {}x{}, expected {j}x{j}",
                    u.rows(),
                    u.cols()
                )));
            }
            let defect = u.orthonormality_defect();
            if defect > orthonormal_tol {
                return Err(Error::InvalidCompressed(format!(
                    "factor {m} deviates from orthonormality by {defect:e}"
                )));
            }
        }
        self.sparse_core.validate(self.plan.element_count())?;
        let expected = tensvd_storage_cost(&self.plan, self.sparse_core.len());
        if self.stored_count != expected {
            return Err(Error::InvalidCompressed(format!(
                "stored count {} does not match accounting {expected}",
                self.stored_count
            )));
        }
        Ok(())
    }
}

/// `Σ J_m² + 2k`.
pub fn tensvd_storage_cost(plan: &ReshapePlan, k: usize) -> u64 {
    factor_cost(plan) + 2 * k as u64
}

fn factor_cost(plan: &ReshapePlan) -> u64 {
    plan.reshaped_dims()
        .iter()
        .map(|&j| (j as u64) * (j as u64))
        .sum()
}

/// Decreasing magnitude, then ascending linear index.
fn by_magnitude(core: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| core[b].abs().total_cmp(&core[a].abs()).then(a.cmp(&b))
}

/// Greedy selection of core entries by magnitude.
///
/// For [`CompressionTarget::Epsilon`] the prefix stops at the first length whose
/// residual energy is at most `ε²·‖𝒢‖²`. For
/// [`CompressionTarget::StoredFraction`] it is the longest prefix with
/// `factor_cost + 2k ≤ com·|𝒢|`, where `|𝒢|` equals the original element count.
pub fn select_core_entries(
    core: &DenseTensor,
    target: CompressionTarget,
    factor_cost: u64,
) -> SparseCore {
    let g = core.data();
    let size = g.len();
    match target {
        CompressionTarget::StoredFraction(com) => {
            let budget = (com * size as f64).floor() as u64;
            let k = (budget.saturating_sub(factor_cost) / 2).min(size as u64) as usize;
            select_largest(core, k)
        }
        CompressionTarget::Epsilon(eps) => {
            let mut order: Vec<usize> = (0..size).collect();
            order.sort_unstable_by(by_magnitude(g));
            // residual[k] = Σ_{i≥k} g², summed from the small end.
            let mut residual = vec![0.0f64; size + 1];
            for i in (0..size).rev() {
                residual[i] = residual[i + 1] + g[order[i]] * g[order[i]];
            }
            let bound = eps * eps * residual[0];
            let k = (0..=size).find(|&k| residual[k] <= bound).unwrap_or(size);
            order.truncate(k);
            gather(g, &order)
        }
    }
}

/// The `k` largest-magnitude entries (ties to the smaller linear index).
pub fn select_largest(core: &DenseTensor, k: usize) -> SparseCore {
    let g = core.data();
    let k = k.min(g.len());
    if k == 0 {
        return SparseCore::default();
    }
    let mut order: Vec<usize> = (0..g.len()).collect();
    if k < g.len() {
        order.select_nth_unstable_by(k - 1, by_magnitude(g));
        order.truncate(k);
    }
    order.sort_unstable_by(by_magnitude(g));
    gather(g, &order)
}

fn gather(g: &[f64], order: &[usize]) -> SparseCore {
    SparseCore {
        positions: order.iter().map(|&i| i as u64).collect(),
        values: order.iter().map(|&i| g[i]).collect(),
    }
}

/// Compresses `t` to the requested target.
pub fn compress(
    t: &DenseTensor,
    target: CompressionTarget,
    order_hint: Option<usize>,
) -> Result<CompressedTensor> {
    let plan = plan_shape(t.dims(), order_hint)?;
    compress_with_plan(t, target, plan)
}

pub fn compress_with_plan(
    t: &DenseTensor,
    target: CompressionTarget,
    plan: ReshapePlan,
) -> Result<CompressedTensor> {
    let target = target.validated()?;
    let z = remap(t, &plan)?;
    let total_energy = z.squared_norm();
    if total_energy == 0.0 {
        return Err(Error::ZeroTensor);
    }

    let cost = factor_cost(&plan);
    let count = plan.element_count();
    if let CompressionTarget::StoredFraction(com) = target {
        let minimum = cost as f64 / count as f64;
        if cost > (com * count as f64).floor() as u64 {
            return Err(Error::InfeasibleBudget {
                requested: com,
                minimum,
            });
        }
    }

    let factors = all_mode_factors(&z, plan.reshaped_dims(), FactorMethod::Gram)?;
    let core = project_core(&z, &factors)?;
    let sparse_core = select_core_entries(&core, target, cost);
    let stored_count = tensvd_storage_cost(&plan, sparse_core.len());
    Ok(CompressedTensor {
        plan,
        factors,
        sparse_core,
        total_energy,
        stored_count,
    })
}

/// Rebuilds the tensor in its original shape.
pub fn decompress(c: &CompressedTensor) -> Result<DenseTensor> {
    let dims = c.plan.reshaped_dims();
    if c.factors.len() != dims.len() {
        return Err(Error::InvalidCompressed(format!(
            "{} factors for a reshaped order of {}",
            c.factors.len(),
            dims.len()
        )));
    }
    let mut z = c.sparse_core.to_dense(dims)?;
    for (mode, u) in c.factors.iter().enumerate() {
        z = z.mode_n_product(u, mode)?;
    }
    inverse_remap(&z, &c.plan)
}
