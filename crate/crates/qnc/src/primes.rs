//! Prime generation for the row/column index sets of operator truncations.

use crate::error::QncError;

/// Hard cap on the number of primes a table may hold. Matrix storage is
/// quadratic in this count, so the cap bounds memory at desk scale.
pub const MAX_PRIME_COUNT: usize = 100_000;

/// The ordered primes `p_1 = 2, p_2 = 3, p_3 = 5, ...` up to a sieve bound.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    primes: Vec<u64>,
    limit: u64,
}

impl PrimeTable {
    /// First `n` primes in increasing order.
    pub fn first_n(n: usize) -> Result<Self, QncError> {
        if n == 0 {
            return Err(QncError::InvalidArgument(
                "prime count must be at least 1".into(),
            ));
        }
        if n > MAX_PRIME_COUNT {
            return Err(QncError::Range(format!(
                "prime count {n} exceeds the cap {MAX_PRIME_COUNT}"
            )));
        }
        // Double the sieve bound until it holds n primes.
        let mut limit = 64u64;
        loop {
            let primes = sieve(limit);
            if primes.len() >= n {
                return Ok(Self {
                    primes: primes[..n].to_vec(),
                    limit,
                });
            }
            limit *= 2;
        }
    }

    /// All primes up to and including `limit`.
    pub fn up_to(limit: u64) -> Self {
        Self {
            primes: sieve(limit),
            limit,
        }
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// The `i`-th prime, 0-based.
    pub fn get(&self, i: usize) -> u64 {
        self.primes[i]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.primes
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }
}

fn sieve(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}
