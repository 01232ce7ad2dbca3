//! Lossy tensor compression.
//!
//! Two compressors share the same multilinear kernels:
//!
//! * [`tensvd`]: reshape into a balanced higher-order tensor, take full
//!   orthonormal factors from Gram matrices, and keep only the largest core
//!   coefficients together with their positions;
//! * [`hosvd`]: the truncated HOSVD baseline with fixed per-mode ranks.
//!
//! ```
//! use tensvd::{compress, decompress, CompressionTarget, DenseTensor};
//!
//! let t = DenseTensor::from_fn(vec![6, 10, 3], |i| (i[0] + 2 * i[1] + 3 * i[2]) as f64).unwrap();
//! let c = compress(&t, CompressionTarget::epsilon(0.01).unwrap(), None).unwrap();
//! let back = decompress(&c).unwrap();
//! assert!(tensvd::metrics::relative_error(&t, &back).unwrap() <= 0.01);
//! ```

pub mod bench;
pub mod codec;
pub mod error;
pub mod hosvd;
pub mod media_io;
pub mod metrics;
pub mod reshape;
pub mod svd;
pub mod tensor;
pub mod tensvd;

pub use error::{CodecError, Error, Result};
pub use hosvd::{
    hosvd_storage_cost, reconstruct, t_hosvd, t_hosvd_with, FactorMethod, TuckerFactors,
};
pub use metrics::QualityReport;
pub use reshape::{plan_shape, ReshapePlan};
pub use tensor::{DenseTensor, Matrix};
pub use tensvd::{
    compress, decompress, select_core_entries, tensvd_storage_cost, CompressedTensor,
    CompressionTarget, SparseCore,
};
