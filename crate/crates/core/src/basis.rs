//! Monomial basis of the local Taylor polynomials.
//!
//! Monomials are taken in scaled local coordinates `u = (x - center) / h` and
//! flattened to unique exponent triples in graded-lexicographic order: total
//! degree ascending, then lexicographically descending on `(i, j, k)` so that
//! the degree-1 block reads `x, y, z`.

use crate::error::{Error, Result};
use crate::Vec3;

pub const MAX_ORDER: u32 = 4;

/// Number of monomials of total degree at most `order` in three variables,
/// `C(order + 3, 3)`.
pub fn basis_size(order: u32) -> Result<usize> {
    if order > MAX_ORDER {
        return Err(Error::InvalidOrder(order));
    }
    let d = order as usize;
    Ok((d + 1) * (d + 2) * (d + 3) / 6)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialBasis {
    order: u32,
    exponents: Vec<[u8; 3]>,
}

impl MonomialBasis {
    pub fn new(order: u32) -> Result<Self> {
        let size = basis_size(order)?;
        let mut exponents = Vec::with_capacity(size);
        for degree in 0..=order as u8 {
            for i in (0..=degree).rev() {
                for j in (0..=degree - i).rev() {
                    exponents.push([i, j, degree - i - j]);
                }
            }
        }
        debug_assert_eq!(exponents.len(), size);
        Ok(Self { order, exponents })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[[u8; 3]] {
        &self.exponents
    }

    /// Number of leading basis entries whose total degree is at most `order`.
    /// Graded ordering makes every lower-order basis a prefix of this one.
    pub fn prefix_len(&self, order: u32) -> usize {
        basis_size(order.min(self.order)).expect("order bounded by MAX_ORDER")
    }

    /// Writes the monomials of `u` into `out`, which must hold `self.len()`
    /// values.
    #[inline]
    pub fn eval_scaled(&self, u: [f64; 3], out: &mut [f64]) {
        let m = monomials(self.order, u);
        out[..self.len()].copy_from_slice(&m[..self.len()]);
    }

    /// Dot product of `coeffs` with the monomials of `u`.
    #[inline]
    pub fn dot_scaled(&self, coeffs: &[f64], u: [f64; 3]) -> f64 {
        match self.order {
            0 => dot::<0>(coeffs, u),
            1 => dot::<1>(coeffs, u),
            2 => dot::<2>(coeffs, u),
            3 => dot::<3>(coeffs, u),
            _ => dot::<4>(coeffs, u),
        }
    }
}

const MAX_BASIS: usize = 35;
const SIZES: [usize; MAX_ORDER as usize + 1] = [1, 4, 10, 20, 35];

#[inline(always)]
fn dot<const ORDER: usize>(coeffs: &[f64], u: [f64; 3]) -> f64 {
    let n = SIZES[ORDER];
    let m = monomials(ORDER as u32, u);
    let c = &coeffs[..n];
    let mut acc = 0.0;
    for i in 0..n {
        acc += c[i] * m[i];
    }
    acc
}

/// Graded-lex monomials with one multiplication each: the degree-`d` block
/// is `x` times the whole degree-`d-1` block, then `y` times its last `d`
/// entries (those free of `x`), then `z^d`. Unrolled for speed.
#[inline(always)]
#[rustfmt::skip]
fn monomials(order: u32, [x, y, z]: [f64; 3]) -> [f64; MAX_BASIS] {
    let mut m = [0.0; MAX_BASIS];
    m[0] = 1.0;
    if order < 1 {
        return m;
    }
    m[1] = x * m[0]; m[2] = y * m[0]; m[3] = z * m[0];
    if order < 2 {
        return m;
    }
    m[4] = x * m[1]; m[5] = x * m[2]; m[6] = x * m[3];
    m[7] = y * m[2]; m[8] = y * m[3]; m[9] = z * m[3];
    if order < 3 {
        return m;
    }
    m[10] = x * m[4]; m[11] = x * m[5]; m[12] = x * m[6];
    m[13] = x * m[7]; m[14] = x * m[8]; m[15] = x * m[9];
    m[16] = y * m[7]; m[17] = y * m[8]; m[18] = y * m[9];
    m[19] = z * m[9];
    if order < 4 {
        return m;
    }
    m[20] = x * m[10]; m[21] = x * m[11]; m[22] = x * m[12];
    m[23] = x * m[13]; m[24] = x * m[14]; m[25] = x * m[15];
    m[26] = x * m[16]; m[27] = x * m[17]; m[28] = x * m[18];
    m[29] = x * m[19]; m[30] = y * m[16]; m[31] = y * m[17];
    m[32] = y * m[18]; m[33] = y * m[19]; m[34] = z * m[19];
    m
}

#[inline]
pub(crate) fn scaled_offset(x: &Vec3, center: &Vec3, h: f64) -> [f64; 3] {
    let inv = 1.0 / h;
    [(x.x - center.x) * inv, (x.y - center.y) * inv, (x.z - center.z) * inv]
}

/// Monomial vector `X(x, center)` in scaled coordinates `(x - center) / h`.
pub fn monomial_vector(x: &Vec3, center: &Vec3, h: f64, order: u32) -> Result<Vec<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidScale(h));
    }
    let basis = MonomialBasis::new(order)?;
    let mut out = vec![0.0; basis.len()];
    basis.eval_scaled(scaled_offset(x, center, h), &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_follow_binomial() {
        let sizes: Vec<usize> = (0..=4).map(|o| basis_size(o).unwrap()).collect();
        assert_eq!(sizes, vec![1, 4, 10, 20, 35]);
        assert!(matches!(basis_size(5), Err(Error::InvalidOrder(5))));
    }

    #[test]
    fn graded_lex_table() {
        let b = MonomialBasis::new(2).unwrap();
        assert_eq!(
            b.exponents(),
            &[
                [0, 0, 0],
                [1, 0, 0],
                [0, 1, 0],
                [0, 0, 1],
                [2, 0, 0],
                [1, 1, 0],
                [1, 0, 1],
                [0, 2, 0],
                [0, 1, 1],
                [0, 0, 2],
            ]
        );
        for order in 0..=4 {
            let b = MonomialBasis::new(order).unwrap();
            let mut seen = std::collections::HashSet::new();
            let mut last_degree = 0;
            for e in b.exponents() {
                let d = e.iter().map(|&v| v as u32).sum::<u32>();
                assert!(d >= last_degree && d <= order);
                last_degree = d;
                assert!(seen.insert(*e));
            }
        }
    }

    #[test]
    fn lower_orders_are_prefixes() {
        let full = MonomialBasis::new(4).unwrap();
        for order in 0..4 {
            let b = MonomialBasis::new(order).unwrap();
            assert_eq!(&full.exponents()[..b.len()], b.exponents());
            assert_eq!(full.prefix_len(order), b.len());
        }
    }

    #[test]
    fn monomials_at_center_and_offsets() {
        let c = Vec3::new(0.1, -0.2, 0.3);
        let h = 0.04;
        let at_center = monomial_vector(&c, &c, h, 2).unwrap();
        assert_eq!(at_center, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);

        let x = c + Vec3::new(h, 0.0, 0.0);
        let v = monomial_vector(&x, &c, h, 1).unwrap();
        for (a, b) in v.iter().zip([1.0, 1.0, 0.0, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }

        // u = (1, 1, 0): hand-enumerated order-2 table gives
        // 1, x, y, z, x^2, xy, xz, y^2, yz, z^2 = 1, 1, 1, 0, 1, 1, 0, 1, 0, 0
        let x = c + Vec3::new(h, h, 0.0);
        let v = monomial_vector(&x, &c, h, 2).unwrap();
        let expected = [1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0];
        for (a, b) in v.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_scale() {
        let c = Vec3::zeros();
        assert!(matches!(monomial_vector(&c, &c, 0.0, 1), Err(Error::InvalidScale(_))));
        assert!(matches!(monomial_vector(&c, &c, -1.0, 1), Err(Error::InvalidScale(_))));
    }

    #[test]
    fn dot_matches_vector() {
        let b = MonomialBasis::new(4).unwrap();
        let coeffs: Vec<f64> = (0..b.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let u = [0.3, -1.2, 0.7];
        let mut m = vec![0.0; b.len()];
        b.eval_scaled(u, &mut m);
        let direct: f64 = coeffs.iter().zip(&m).map(|(a, b)| a * b).sum();
        assert!((direct - b.dot_scaled(&coeffs, u)).abs() < 1e-12);
    }

    #[test]
    fn monomials_match_exponent_table() {
        let u = [0.3, -1.2, 0.7];
        for order in 0..=MAX_ORDER {
            let b = MonomialBasis::new(order).unwrap();
            let mut m = vec![0.0; b.len()];
            b.eval_scaled(u, &mut m);
            for (v, e) in m.iter().zip(b.exponents()) {
                let want = u[0].powi(e[0] as i32) * u[1].powi(e[1] as i32) * u[2].powi(e[2] as i32);
                assert!((v - want).abs() <= 1e-15 * want.abs().max(1.0), "{e:?}");
            }
        }
    }
}
