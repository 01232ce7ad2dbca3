//! Little-endian container formats.
//!
//! `.tsvd` (sparse-core compression), version 1:
//!
//! ```text
//! magic      4   "TSVD"
//! version    u16
//! N          u32, then N × u32 original dims
//! M          u32, then M × u32 reshaped dims
//! factors    Σ J_m² × f32, each factor column-major, mode order
//! K          u64
//! values     K × f32   (decreasing magnitude)
//! positions  K × u64   (column-major linear index into the reshaped core)
//! energy     f64       (‖𝒵‖²)
//! ```
//!
//! `.thsv` (truncated Tucker), version 1:
//!
//! ```text
//! magic "THSV", version u16, N u32, N × u32 dims, N × u32 ranks,
//! factors Σ I_n·r_n × f32, core ∏ r_n × f32
//! ```

use std::collections::HashSet;

use crate::error::CodecError;
use crate::hosvd::TuckerFactors;
use crate::reshape::ReshapePlan;
use crate::tensor::{DenseTensor, Matrix};
use crate::tensvd::{tensvd_storage_cost, CompressedTensor, SparseCore};

pub const TSVD_MAGIC: [u8; 4] = *b"TSVD";
pub const THSV_MAGIC: [u8; 4] = *b"THSV";
pub const VERSION: u16 = 1;

/// Bytes before the factor payload of a `.tsvd` stream.
pub fn header_len(original_order: usize, reshaped_order: usize) -> usize {
    4 + 2 + 4 + 4 * original_order + 4 + 4 * reshaped_order
}

/// Exact `.tsvd` size: header, factors, K, values, positions, energy.
pub fn encoded_len(plan: &ReshapePlan, entries: usize) -> usize {
    let factors: usize = plan.reshaped_dims().iter().map(|j| j * j).sum();
    header_len(plan.original_dims().len(), plan.reshaped_dims().len())
        + 4 * factors
        + 8
        + 12 * entries
        + 8
}

/// Which container a byte stream holds, judging by its magic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Container {
    Tsvd,
    Thsv,
}

pub fn sniff(bytes: &[u8]) -> Result<Container, CodecError> {
    let mut r = Reader::new(bytes);
    let magic = r.array::<4>("magic")?;
    match magic {
        TSVD_MAGIC => Ok(Container::Tsvd),
        THSV_MAGIC => Ok(Container::Thsv),
        found => Err(CodecError::BadMagic {
            found,
            expected: TSVD_MAGIC,
        }),
    }
}

pub fn encode(c: &CompressedTensor) -> Vec<u8> {
    let plan = &c.plan;
    let mut out = Vec::with_capacity(encoded_len(plan, c.sparse_core.len()));
    out.extend_from_slice(&TSVD_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    put_shape(&mut out, plan.original_dims());
    put_shape(&mut out, plan.reshaped_dims());
    for u in &c.factors {
        put_f32s(&mut out, u.data());
    }
    out.extend_from_slice(&(c.sparse_core.len() as u64).to_le_bytes());
    put_f32s(&mut out, &c.sparse_core.values);
    for p in &c.sparse_core.positions {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out.extend_from_slice(&c.total_energy.to_le_bytes());
    out
}

pub fn decode(bytes: &[u8]) -> Result<CompressedTensor, CodecError> {
    let mut r = Reader::new(bytes);
    r.magic(TSVD_MAGIC)?;
    r.version()?;
    let original = r.shape("original dims")?;
    let reshaped = r.shape("reshaped dims")?;
    let original_count = volume(&original, "original")?;
    let reshaped_count = volume(&reshaped, "reshaped")?;
    if original_count != reshaped_count {
        return Err(CodecError::ElementCountMismatch {
            original: original_count,
            reshaped: reshaped_count,
        });
    }
    let plan = ReshapePlan::new(original, reshaped.clone())
        .map_err(|e| CodecError::InvalidHeader(e.to_string()))?;

    let mut factors = Vec::with_capacity(reshaped.len());
    for &j in &reshaped {
        let data = r.f32s("factor payload", j * j)?;
        factors.push(Matrix::from_col_major(j, j, data).expect("length checked"));
    }

    let k = r.u64("entry count")?;
    if k > reshaped_count {
        return Err(CodecError::InvalidHeader(format!(
            "{k} core entries exceed the core size {reshaped_count}"
        )));
    }
    let k = k as usize;
    let values = r.f32s("core values", k)?;
    let mut positions = Vec::with_capacity(k);
    let mut seen = HashSet::with_capacity(k);
    for _ in 0..k {
        let p = r.u64("core positions")?;
        if p >= reshaped_count {
            return Err(CodecError::PositionOutOfRange {
                position: p,
                size: reshaped_count,
            });
        }
        if !seen.insert(p) {
            return Err(CodecError::DuplicatePosition(p));
        }
        positions.push(p);
    }
    let total_energy = r.f64("total energy")?;
    r.finish()?;

    let stored_count = tensvd_storage_cost(&plan, k);
    Ok(CompressedTensor {
        plan,
        factors,
        sparse_core: SparseCore { positions, values },
        total_energy,
        stored_count,
    })
}

pub fn encode_tucker(f: &TuckerFactors) -> Vec<u8> {
    let dims = f.dims();
    let mut out = Vec::new();
    out.extend_from_slice(&THSV_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    put_shape(&mut out, &dims);
    for &r in f.ranks() {
        out.extend_from_slice(&(r as u32).to_le_bytes());
    }
    for u in &f.factors {
        put_f32s(&mut out, u.data());
    }
    put_f32s(&mut out, f.core.data());
    out
}

pub fn decode_tucker(bytes: &[u8]) -> Result<TuckerFactors, CodecError> {
    let mut r = Reader::new(bytes);
    r.magic(THSV_MAGIC)?;
    r.version()?;
    let dims = r.shape("dims")?;
    let mut ranks = Vec::with_capacity(dims.len());
    for &d in &dims {
        let rank = r.u32("ranks")? as usize;
        if rank == 0 || rank > d {
            return Err(CodecError::InvalidHeader(format!(
                "rank {rank} outside 1..={d}"
            )));
        }
        ranks.push(rank);
    }
    let core_len = volume(&ranks, "core")? as usize;
    let mut factors = Vec::with_capacity(dims.len());
    for (&d, &rank) in dims.iter().zip(&ranks) {
        let data = r.f32s("factor payload", d * rank)?;
        factors.push(Matrix::from_col_major(d, rank, data).expect("length checked"));
    }
    let core = r.f32s("core payload", core_len)?;
    r.finish()?;
    let core = DenseTensor::new(ranks, core).expect("length checked");
    TuckerFactors::new(factors, core).map_err(|e| CodecError::InvalidHeader(e.to_string()))
}

fn put_shape(out: &mut Vec<u8>, dims: &[usize]) {
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
}

fn put_f32s(out: &mut Vec<u8>, values: &[f64]) {
    for &v in values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
}

fn volume(dims: &[usize], what: &str) -> Result<u64, CodecError> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(CodecError::InvalidHeader(format!(
            "{what} shape {dims:?} is empty or has a zero dimension"
        )));
    }
    dims.iter()
        .try_fold(1u64, |acc, &d| acc.checked_mul(d as u64))
        .ok_or_else(|| CodecError::InvalidHeader(format!("{what} shape {dims:?} overflows")))
}

struct Reader<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, offset: 0 }
    }

    fn take(&mut self, field: &'static str, n: usize) -> Result<&'a [u8], CodecError> {
        let available = self.bytes.len() - self.offset;
        if n > available {
            return Err(CodecError::Truncated {
                field,
                offset: self.offset,
                expected: n,
                available,
            });
        }
        let out = &self.bytes[self.offset..self.offset + n];
        self.offset += n;
        Ok(out)
    }

    fn array<const N: usize>(&mut self, field: &'static str) -> Result<[u8; N], CodecError> {
        Ok(self.take(field, N)?.try_into().expect("exact length"))
    }

    fn u32(&mut self, field: &'static str) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.array(field)?))
    }

    fn u64(&mut self, field: &'static str) -> Result<u64, CodecError> {
        Ok(u64::from_le_bytes(self.array(field)?))
    }

    fn f64(&mut self, field: &'static str) -> Result<f64, CodecError> {
        Ok(f64::from_le_bytes(self.array(field)?))
    }

    fn f32s(&mut self, field: &'static str, n: usize) -> Result<Vec<f64>, CodecError> {
        let bytes = self.take(field, n.saturating_mul(4))?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("chunk of 4")) as f64)
            .collect())
    }

    fn magic(&mut self, expected: [u8; 4]) -> Result<(), CodecError> {
        let found = self.array::<4>("magic")?;
        if found != expected {
            return Err(CodecError::BadMagic { found, expected });
        }
        Ok(())
    }

    fn version(&mut self) -> Result<(), CodecError> {
        let v = u16::from_le_bytes(self.array("version")?);
        if v != VERSION {
            return Err(CodecError::UnsupportedVersion(v));
        }
        Ok(())
    }

    fn shape(&mut self, field: &'static str) -> Result<Vec<usize>, CodecError> {
        let n = self.u32(field)? as usize;
        if n == 0 {
            return Err(CodecError::InvalidHeader(format!("{field}: order 0")));
        }
        // Each dim needs 4 bytes; reject absurd orders before allocating.
        if n > (self.bytes.len() - self.offset) / 4 {
            return Err(CodecError::Truncated {
                field,
                offset: self.offset,
                expected: 4 * n,
                available: self.bytes.len() - self.offset,
            });
        }
        (0..n)
            .map(|_| self.u32(field).map(|d| d as usize))
            .collect()
    }

    fn finish(&self) -> Result<(), CodecError> {
        match self.bytes.len() - self.offset {
            0 => Ok(()),
            extra => Err(CodecError::TrailingBytes(extra)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensvd::{compress, CompressionTarget};

    fn sample() -> CompressedTensor {
        let t = DenseTensor::from_fn(vec![6, 10, 3], |i| {
            ((i[0] * 31 + i[1] * 17 + i[2] * 7) % 13) as f64 / 13.0
        })
        .unwrap();
        compress(&t, CompressionTarget::Epsilon(0.2), Some(4)).unwrap()
    }

    #[test]
    fn header_length_for_order_three_to_four() {
        assert_eq!(header_len(3, 4), 42);
    }

    #[test]
    fn size_formula_and_determinism() {
        let c = sample();
        let a = encode(&c);
        assert_eq!(a.len(), encoded_len(&c.plan, c.sparse_core.len()));
        assert_eq!(a, encode(&c));
        assert_eq!(sniff(&a).unwrap(), Container::Tsvd);
    }

    #[test]
    fn bad_magic() {
        let mut bytes = encode(&sample());
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes), Err(CodecError::BadMagic { .. })));
        assert!(sniff(&bytes).is_err());
    }

    #[test]
    fn unsupported_version() {
        let mut bytes = encode(&sample());
        bytes[4] = 9;
        assert_eq!(decode(&bytes), Err(CodecError::UnsupportedVersion(9)));
    }

    #[test]
    fn truncated_in_factor_payload() {
        let c = sample();
        let bytes = encode(&c);
        let cut = header_len(3, c.plan.reshaped_dims().len()) + 10;
        match decode(&bytes[..cut]) {
            Err(CodecError::Truncated {
                field, expected, ..
            }) => {
                assert_eq!(field, "factor payload");
                let j = c.plan.reshaped_dims()[0];
                assert_eq!(expected, 4 * j * j);
            }
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn position_out_of_range() {
        let mut c = sample();
        let size = c.plan.element_count() as u64;
        c.sparse_core.positions[0] = size;
        assert_eq!(
            decode(&encode(&c)),
            Err(CodecError::PositionOutOfRange {
                position: size,
                size
            })
        );
    }

    #[test]
    fn duplicate_position() {
        let mut c = sample();
        c.sparse_core.positions[1] = c.sparse_core.positions[0];
        assert!(matches!(
            decode(&encode(&c)),
            Err(CodecError::DuplicatePosition(_))
        ));
    }

    #[test]
    fn element_count_mismatch() {
        let mut bytes = encode(&sample());
        // first original dim lives right after magic, version and N
        bytes[10..14].copy_from_slice(&7u32.to_le_bytes());
        assert!(matches!(
            decode(&bytes),
            Err(CodecError::ElementCountMismatch { .. })
        ));
    }

    #[test]
    fn trailing_bytes() {
        let mut bytes = encode(&sample());
        bytes.push(0);
        assert_eq!(decode(&bytes), Err(CodecError::TrailingBytes(1)));
    }

    #[test]
    fn tucker_container_round_trip() {
        let t = DenseTensor::from_fn(vec![4, 5, 3], |i| (i[0] + i[1] * i[2]) as f64).unwrap();
        let f = crate::hosvd::t_hosvd(&t, &[2, 3, 2]).unwrap();
        let bytes = encode_tucker(&f);
        assert_eq!(sniff(&bytes).unwrap(), Container::Thsv);
        let back = decode_tucker(&bytes).unwrap();
        assert_eq!(back.ranks(), &[2, 3, 2]);
        for (a, b) in back.core.data().iter().zip(f.core.data()) {
            assert_eq!(*a, *b as f32 as f64);
        }
        assert!(decode_tucker(&bytes[..bytes.len() - 1]).is_err());
    }
}
