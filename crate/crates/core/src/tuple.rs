//! Mixed-radix tuple indexing.
//!
//! A tuple `(a_0, .., a_{n-1})` over an alphabet of size `r` has index
//! `a_0 + a_1 r + .. + a_{n-1} r^{n-1}` (little-endian coordinate order).
//! Dense tables over pairs `(a, b)` follow the same rule: `a + |A| * b`.

/// Index of `digits` in radix `radix`.
pub fn encode(digits: &[usize], radix: usize) -> u64 {
    digits
        .iter()
        .rev()
        .fold(0u64, |acc, &d| acc * radix as u64 + d as u64)
}

/// Inverse of [`encode`] for tuples of length `n`.
pub fn decode(index: u64, radix: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    decode_into(index, radix, &mut out);
    out
}

pub fn decode_into(mut index: u64, radix: usize, out: &mut [usize]) {
    let r = radix as u64;
    for d in out.iter_mut() {
        *d = (index % r) as usize;
        index /= r;
    }
}

/// `radix^n`, or `None` on overflow.
pub fn count(radix: usize, n: usize) -> Option<u64> {
    (radix as u64).checked_pow(u32::try_from(n).ok()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn little_endian_order() {
        assert_eq!(encode(&[1, 0, 0], 2), 1);
        assert_eq!(encode(&[0, 0, 1], 2), 4);
        assert_eq!(encode(&[2, 1], 3), 5);
        assert_eq!(decode(5, 3, 2), vec![2, 1]);
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(radix in 1usize..6, digits in proptest::collection::vec(0usize..6, 0..8)) {
            let digits: Vec<usize> = digits.into_iter().map(|d| d % radix).collect();
            let idx = encode(&digits, radix);
            prop_assert_eq!(decode(idx, radix, digits.len()), digits);
        }
    }
}
