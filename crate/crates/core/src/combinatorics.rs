//! Compositions and multinomial coefficients for type-class enumeration.

/// Calls `f` with every composition of `total` into `parts` nonnegative parts,
/// in lexicographic order of the count vector.
pub(crate) fn for_each_composition(total: usize, parts: usize, f: &mut impl FnMut(&[usize])) {
    if parts == 0 {
        if total == 0 {
            f(&[]);
        }
        return;
    }
    let mut counts = vec![0usize; parts];
    fill(total, 0, &mut counts, f);
}

fn fill(remaining: usize, pos: usize, counts: &mut [usize], f: &mut impl FnMut(&[usize])) {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        f(counts);
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        fill(remaining - c, pos + 1, counts, f);
    }
}

/// Number of compositions of `total` into `parts` parts, `C(total + parts - 1, parts - 1)`.
pub(crate) fn composition_count(total: usize, parts: usize) -> Option<u128> {
    if parts == 0 {
        return Some(u128::from(total == 0));
    }
    binomial((total + parts - 1) as u64, (parts - 1) as u64)
}

pub(crate) fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// `total! / prod(counts!)`, `None` on overflow.
pub(crate) fn multinomial(counts: &[usize]) -> Option<u128> {
    let mut acc: u128 = 1;
    let mut seen = 0u64;
    for &c in counts {
        acc = acc.checked_mul(binomial(seen + c as u64, c as u64)?)?;
        seen += c as u64;
    }
    Some(acc)
}

/// `ln k!` for `k = 0..=n`.
pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}
