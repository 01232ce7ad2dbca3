//! Balanced reshaping of a tensor into a higher-order, near-hypercubic shape.
//!
//! The element count is split into primes, and the primes are dealt out to `M`
//! bins, largest first, each going to the bin with the smallest running product
//! (lowest index on ties). Without an explicit order, every `M` in `3..=8` is
//! tried and the one with the smallest `max(J)/min(J)` wins, ties going to the
//! smaller `M`. The remap itself never moves data: the column-major buffer is
//! reinterpreted under the new shape.

use log::warn;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensor::{checked_volume, DenseTensor};

/// Orders tried when the caller does not ask for one.
pub const AUTO_ORDERS: std::ops::RangeInclusive<usize> = 3..=8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReshapePlan {
    original_dims: Vec<usize>,
    reshaped_dims: Vec<usize>,
}

impl ReshapePlan {
    pub fn new(original_dims: Vec<usize>, reshaped_dims: Vec<usize>) -> Result<Self> {
        let a = checked_volume(&original_dims)?;
        let b = checked_volume(&reshaped_dims)?;
        if a != b {
            return Err(Error::DimensionMismatch(format!(
                "reshape {original_dims:?} ({a} elements) to {reshaped_dims:?} ({b} elements)"
            )));
        }
        Ok(Self {
            original_dims,
            reshaped_dims,
        })
    }

    pub fn original_dims(&self) -> &[usize] {
        &self.original_dims
    }

    pub fn reshaped_dims(&self) -> &[usize] {
        &self.reshaped_dims
    }

    pub fn element_count(&self) -> usize {
        self.original_dims.iter().product()
    }

    /// `max(J)/min(J)`.
    pub fn imbalance(&self) -> f64 {
        imbalance(&self.reshaped_dims)
    }

    /// A single-mode plan over more than one element: nothing to decompose.
    pub fn is_degenerate(&self) -> bool {
        self.reshaped_dims.len() == 1 && self.element_count() > 1
    }
}

/// Prime factors of `n`, ascending, with multiplicity. `1` has none.
pub fn prime_factorize(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    while n > 0 && n.is_multiple_of(2) {
        out.push(2);
        n /= 2;
    }
    let mut p = 3;
    while p * p <= n {
        while n.is_multiple_of(p) {
            out.push(p);
            n /= p;
        }
        p += 2;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn imbalance(dims: &[usize]) -> f64 {
    let max = *dims.iter().max().unwrap_or(&1) as f64;
    let min = *dims.iter().min().unwrap_or(&1) as f64;
    max / min
}

/// Greedy largest-prime-to-smallest-bin assignment over `bins` bins.
pub fn greedy_bins(primes: &[u64], bins: usize) -> Vec<usize> {
    let mut sorted = primes.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut out = vec![1usize; bins];
    for p in sorted {
        let (slot, _) = out
            .iter()
            .enumerate()
            .min_by_key(|&(i, &v)| (v, i))
            .expect("at least one bin");
        out[slot] *= p as usize;
    }
    out
}

/// Chooses a balanced higher-order shape for `dims`.
///
/// An explicit `order_hint` must not exceed the number of prime factors of the
/// element count. Without a hint, counts with fewer than three prime factors fall
/// back to one mode per prime (a single mode when the count is prime) and log a
/// warning.
pub fn plan_shape(dims: &[usize], order_hint: Option<usize>) -> Result<ReshapePlan> {
    let count = checked_volume(dims)?;
    let primes = prime_factorize(count as u64);

    if let Some(order) = order_hint {
        let feasible = order >= 1 && (order <= primes.len() || (count == 1 && order == 1));
        if !feasible {
            return Err(Error::InfeasibleOrder {
                order,
                count,
                factors: primes.len(),
            });
        }
        return ReshapePlan::new(dims.to_vec(), greedy_bins(&primes, order));
    }

    let mut best: Option<Vec<usize>> = None;
    for order in AUTO_ORDERS.filter(|&m| m <= primes.len()) {
        let bins = greedy_bins(&primes, order);
        if best
            .as_ref()
            .is_none_or(|b| imbalance(&bins) < imbalance(b))
        {
            best = Some(bins);
        }
    }
    let reshaped = match best {
        Some(bins) => bins,
        None => {
            let order = primes.len().max(1);
            warn!(
                "{count} elements have only {} prime factor(s); using a degenerate order-{order} reshape",
                primes.len()
            );
            greedy_bins(&primes, order)
        }
    };
    ReshapePlan::new(dims.to_vec(), reshaped)
}

/// Reinterprets `t` under the plan's reshaped dims.
pub fn remap(t: &DenseTensor, plan: &ReshapePlan) -> Result<DenseTensor> {
    if t.dims() != plan.original_dims() {
        return Err(Error::DimensionMismatch(format!(
            "tensor {:?} does not match plan input {:?}",
            t.dims(),
            plan.original_dims()
        )));
    }
    t.clone().reshaped(plan.reshaped_dims.clone())
}

/// Inverse of [`remap`].
pub fn inverse_remap(t: &DenseTensor, plan: &ReshapePlan) -> Result<DenseTensor> {
    if t.dims() != plan.reshaped_dims() {
        return Err(Error::DimensionMismatch(format!(
            "tensor {:?} does not match plan output {:?}",
            t.dims(),
            plan.reshaped_dims()
        )));
    }
    t.clone().reshaped(plan.original_dims.clone())
}
