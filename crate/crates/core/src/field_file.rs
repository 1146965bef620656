//! Versioned binary field file.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "TYLF" | version u16 | order u8 | k u8 | h f64 | theta f64 | alpha f64
//! | point count u64 | per point: position 3 x f64, basis_size(order) x f64
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::basis::basis_size;
use crate::error::{Error, Result};
use crate::field::{ExpansionPoint, FieldParams, TaylorCoefficients, TaylorField};
use crate::Vec3;

pub const MAGIC: &[u8; 4] = b"TYLF";
pub const VERSION: u16 = 1;

pub fn encode(field: &TaylorField) -> Vec<u8> {
    let p = field.params();
    let n = basis_size(p.order).expect("validated order");
    let mut out = Vec::with_capacity(4 + 2 + 2 + 24 + 8 + field.len() * (3 + n) * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(p.order as u8);
    out.push(p.k as u8);
    for v in [p.h, p.theta, p.alpha] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(field.len() as u64).to_le_bytes());
    for point in field.points() {
        for v in point.position.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in point.coefficients.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        if self.buf.len() < N {
            return Err(Error::format("field file", "unexpected end of data"));
        }
        let (head, rest) = self.buf.split_at(N);
        self.buf = rest;
        Ok(head.try_into().unwrap())
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

pub fn decode(bytes: &[u8]) -> Result<TaylorField> {
    let mut cur = Cursor { buf: bytes };
    if &cur.take::<4>()? != MAGIC {
        return Err(Error::format("field file", "bad magic"));
    }
    let version = u16::from_le_bytes(cur.take()?);
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let [order] = cur.take::<1>()?;
    let [k] = cur.take::<1>()?;
    let params =
        FieldParams { order: order as u32, k: k as usize, h: cur.f64()?, theta: cur.f64()?, alpha: cur.f64()? };
    params.validate()?;
    let count = u64::from_le_bytes(cur.take()?);
    let n = basis_size(params.order)?;
    let needed = (count as u128) * ((3 + n) as u128) * 8;
    if needed != cur.buf.len() as u128 {
        return Err(Error::format(
            "field file",
            format!("{count} points need {needed} payload bytes, found {}", cur.buf.len()),
        ));
    }
    let mut points = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let position = Vec3::new(cur.f64()?, cur.f64()?, cur.f64()?);
        let values = (0..n).map(|_| cur.f64()).collect::<Result<Vec<_>>>()?;
        points.push(ExpansionPoint { position, coefficients: TaylorCoefficients::new(params.order, values)? });
    }
    TaylorField::new(points, params)
}

pub fn write_field(field: &TaylorField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode(field)).map_err(|e| Error::io(path, e))
}

pub fn read_field(path: impl AsRef<Path>) -> Result<TaylorField> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    fs::File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_field(order: u32, n: usize, seed: u64) -> TaylorField {
        let size = basis_size(order).unwrap();
        let points = (0..n)
            .map(|i| {
                let f = (i as u64 * 31 + seed) as f64;
                ExpansionPoint {
                    position: Vec3::new((f * 0.3).sin(), (f * 0.7).cos(), (f * 1.1).sin()) * 0.5,
                    coefficients: TaylorCoefficients::new(
                        order,
                        (0..size).map(|j| (f + j as f64).cos() * 1e-3).collect(),
                    )
                    .unwrap(),
                }
            })
            .collect();
        let params = FieldParams { order, h: 0.04, theta: 128.0, k: 4, alpha: 32.0 };
        TaylorField::new(points, params).unwrap()
    }

    #[test]
    fn header_layout() {
        let bytes = encode(&sample_field(3, 2, 0));
        assert_eq!(&bytes[..4], b"TYLF");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
        assert_eq!(bytes[6], 3);
        assert_eq!(bytes[7], 4);
        assert_eq!(f64::from_le_bytes(bytes[8..16].try_into().unwrap()), 0.04);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), 128.0);
        assert_eq!(f64::from_le_bytes(bytes[24..32].try_into().unwrap()), 32.0);
        assert_eq!(u64::from_le_bytes(bytes[32..40].try_into().unwrap()), 2);
        assert_eq!(bytes.len(), 40 + 2 * (3 + 20) * 8);
    }

    #[test]
    fn rejects_unknown_version_and_truncation() {
        let mut bytes = encode(&sample_field(1, 3, 0));
        bytes[4] = 2;
        assert!(matches!(decode(&bytes), Err(Error::UnsupportedVersion(2))));
        let bytes = encode(&sample_field(1, 3, 0));
        assert!(matches!(decode(&bytes[..bytes.len() - 1]), Err(Error::Format { .. })));
        assert!(matches!(decode(b"NOPE"), Err(Error::Format { .. })));
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(order in 0u32..=4, n in 0usize..20, seed in 0u64..1000) {
            let field = sample_field(order, n, seed);
            let bytes = encode(&field);
            let back = decode(&bytes).unwrap();
            prop_assert_eq!(back.params(), field.params());
            prop_assert_eq!(back.points(), field.points());
            prop_assert_eq!(encode(&back), bytes);
        }
    }
}
