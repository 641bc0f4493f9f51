//! Affine 2-universal hash family `x ↦ ((a·x + b) mod p) mod m`.
//!
//! `p` is the smallest prime not below the domain size and `a ≠ 0`. For any
//! two distinct inputs, the fraction of `(a, b)` pairs on which they collide
//! is at most `1/m`.

use crate::rng::WordStream;

/// Smallest prime `≥ n` (and `≥ 2`), by trial division.
pub fn smallest_prime_at_least(n: u64) -> u64 {
    let mut c = n.max(2);
    loop {
        if is_prime(c) {
            return c;
        }
        c += 1;
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniversalHash {
    /// Used when the range is at least as large as the domain.
    Identity,
    Affine {
        prime: u64,
        a: u64,
        b: u64,
        range: u64,
    },
}

impl UniversalHash {
    /// Member of the family for `domain → range` with coefficients `(a, b)`.
    pub fn affine(domain: u64, range: u64, a: u64, b: u64) -> Self {
        let prime = smallest_prime_at_least(domain);
        assert!(range >= 1, "empty hash range");
        assert!(a >= 1 && a < prime && b < prime, "coefficients out of range");
        UniversalHash::Affine { prime, a, b, range }
    }

    /// Uniform member of the family, or the identity when no compression is needed.
    pub fn draw(domain: u64, range: u64, words: &mut WordStream) -> Self {
        assert!(range >= 1, "empty hash range");
        if range >= domain {
            return UniversalHash::Identity;
        }
        let prime = smallest_prime_at_least(domain);
        let a = 1 + words.below(prime - 1);
        let b = words.below(prime);
        UniversalHash::Affine { prime, a, b, range }
    }

    /// Every member of the family, in `(a, b)` lexicographic order.
    pub fn family(domain: u64, range: u64) -> impl Iterator<Item = UniversalHash> {
        let prime = smallest_prime_at_least(domain);
        (1..prime).flat_map(move |a| (0..prime).map(move |b| UniversalHash::Affine { prime, a, b, range }))
    }

    /// Number of members of the affine family for a domain of this size.
    pub fn family_size(domain: u64) -> u64 {
        let p = smallest_prime_at_least(domain);
        p * (p - 1)
    }

    #[inline]
    pub fn apply(&self, x: u64) -> u64 {
        match *self {
            UniversalHash::Identity => x,
            UniversalHash::Affine { prime, a, b, range } => {
                let v = (u128::from(a) * u128::from(x) + u128::from(b)) % u128::from(prime);
                (v as u64) % range
            }
        }
    }
}

/// Exact collision statistics of the whole family over all distinct input pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionReport {
    pub worst_pair_probability: f64,
    pub mean_pair_probability: f64,
    pub members: u64,
}

/// Exhaustive check: for every distinct `(x, y)` in the domain, count the members
/// with `h(x) = h(y)`.
pub fn exhaustive_collision_check(domain: u64, range: u64) -> CollisionReport {
    let d = domain as usize;
    let mut counts = vec![0u32; d * d];
    let mut members = 0u64;
    let mut images = vec![0u64; d];
    for h in UniversalHash::family(domain, range) {
        members += 1;
        for (x, img) in images.iter_mut().enumerate() {
            *img = h.apply(x as u64);
        }
        for x in 0..d {
            for y in x + 1..d {
                if images[x] == images[y] {
                    counts[x * d + y] += 1;
                }
            }
        }
    }
    let mut worst = 0u32;
    let mut total = 0u64;
    let mut pairs = 0u64;
    for x in 0..d {
        for y in x + 1..d {
            let c = counts[x * d + y];
            worst = worst.max(c);
            total += u64::from(c);
            pairs += 1;
        }
    }
    CollisionReport {
        worst_pair_probability: f64::from(worst) / members as f64,
        mean_pair_probability: total as f64 / (pairs.max(1) as f64 * members as f64),
        members,
    }
}
