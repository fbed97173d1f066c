//! Odd-only bit-packed sieve of Eratosthenes.

/// Primality table for all integers `< limit`.
#[derive(Debug, Clone)]
pub struct PrimeSieve {
    limit: u64,
    // bit i set <=> 2i+1 is composite (or 1)
    composite: Vec<u64>,
}

impl PrimeSieve {
    pub fn new(limit: u64) -> Self {
        let n_odd = limit.div_ceil(2) as usize;
        let mut composite = vec![0u64; n_odd.div_ceil(64).max(1)];
        composite[0] |= 1; // 1 is not prime
        let mut i = 3u64;
        while i * i < limit {
            if !bit(&composite, (i / 2) as usize) {
                let mut m = i * i;
                while m < limit {
                    let idx = (m / 2) as usize;
                    composite[idx / 64] |= 1 << (idx % 64);
                    m += 2 * i;
                }
            }
            i += 2;
        }
        Self { limit, composite }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Panics if `n >= limit`.
    #[inline]
    pub fn is_prime(&self, n: u64) -> bool {
        assert!(n < self.limit, "{n} outside sieve range {}", self.limit);
        match n {
            0 | 1 => false,
            2 => true,
            _ if n.is_multiple_of(2) => false,
            _ => !bit(&self.composite, (n / 2) as usize),
        }
    }

    /// Primes `p < bound` in increasing order (`bound ≤ limit`).
    pub fn primes_below(&self, bound: u64) -> impl Iterator<Item = u64> + '_ {
        assert!(bound <= self.limit);
        let two = (bound > 2).then_some(2);
        two.into_iter()
            .chain((3..bound).step_by(2).filter(move |&n| self.is_prime(n)))
    }

    pub fn count_below(&self, bound: u64) -> usize {
        self.primes_below(bound).count()
    }
}

#[inline]
fn bit(words: &[u64], idx: usize) -> bool {
    words[idx / 64] >> (idx % 64) & 1 == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn agrees_with_trial_division() {
        let s = PrimeSieve::new(10_000);
        for n in 0..10_000 {
            assert_eq!(s.is_prime(n), trial_division(n), "{n}");
        }
    }

    #[test]
    fn prime_counts() {
        let s = PrimeSieve::new(1_000_004);
        assert_eq!(s.count_below(10), 4);
        assert_eq!(s.count_below(100), 25);
        assert_eq!(s.count_below(10_007), 1229);
        assert_eq!(s.count_below(1_000_003), 78_498);
        assert_eq!(s.primes_below(3).collect::<Vec<_>>(), vec![2]);
        assert_eq!(s.primes_below(2).count(), 0);
    }

    #[test]
    fn tiny_limits() {
        for limit in 0..5 {
            let s = PrimeSieve::new(limit);
            assert_eq!(s.count_below(limit), (0..limit).filter(|&n| trial_division(n)).count());
        }
    }
}
