//! Binomial coefficients and lexicographic subset enumeration.

use num_bigint::BigUint;

/// `C(n, k)` saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by i + 1, and (i + 1)/g is coprime to acc/g
        let num = (n - i) as u128;
        let g = gcd(acc, (i + 1) as u128);
        match (acc / g).checked_mul(num / ((i + 1) as u128 / g)) {
            Some(v) => acc = v,
            None => return u128::MAX,
        }
    }
    acc
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn binomial_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Advances `c` (strictly increasing, entries below `n`) to the next
/// `k`-subset in lexicographic order. Returns `false` after the last one.
pub fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Calls `f` on every `k`-subset of `0..n` whose smallest element is `first`,
/// in lexicographic order. Used to split enumerations across threads.
pub fn for_each_with_first(n: usize, k: usize, first: usize, mut f: impl FnMut(&[usize])) {
    if k == 0 || first + k > n {
        return;
    }
    let mut c: Vec<usize> = (first..first + k).collect();
    loop {
        f(&c);
        if k == 1 {
            return;
        }
        if !next_combination(&mut c[1..], n) {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(60, 30), 118264581564861424);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(10, 0), 1);
        assert_eq!(binomial_big(100, 50).to_string(), "100891344545564193334812497256");
        assert_eq!(binomial(100, 50), 100891344545564193334812497256u128);
    }

    #[test]
    fn enumeration_counts_and_order() {
        let mut c = vec![0, 1];
        let mut seen = vec![c.clone()];
        while next_combination(&mut c, 4) {
            seen.push(c.clone());
        }
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        let total: usize = (0..7)
            .map(|f| {
                let mut cnt = 0;
                for_each_with_first(7, 3, f, |_| cnt += 1);
                cnt
            })
            .sum();
        assert_eq!(total as u128, binomial(7, 3));
    }
}
