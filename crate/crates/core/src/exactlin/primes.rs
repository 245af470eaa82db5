use std::sync::OnceLock;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const PRIME_LO: u32 = 1 << 30;
pub const PRIME_HI: u32 = 1 << 31;

const DEFAULT_PRIME_SEED: u64 = 0x5eed_0fc0_ffee;

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; bases {2, 7, 61} are exact below 4.7e9.
pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == small {
            return true;
        }
        if n % small == 0 {
            return false;
        }
    }
    let n64 = n as u64;
    let mut d = n64 - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 7, 61] {
        if a % n64 == 0 {
            continue;
        }
        let mut x = pow_mod(a, d, n64);
        if x == 1 || x == n64 - 1 {
            continue;
        }
        for _ in 1..s {
            x = x * x % n64;
            if x == n64 - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Three distinct primes in `[2^30, 2^31)` used for multi-prime rank consensus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeSet {
    primes: [u32; 3],
}

impl PrimeSet {
    /// Draws three distinct uniformly random primes from `[2^30, 2^31)`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut primes = [0u32; 3];
        let mut found = 0;
        while found < 3 {
            let candidate = rng.random_range(PRIME_LO..PRIME_HI) | 1;
            if is_prime(candidate) && !primes[..found].contains(&candidate) {
                primes[found] = candidate;
                found += 1;
            }
        }
        Self { primes }
    }

    pub fn from_seed(seed: u64) -> Self {
        Self::random(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// Panics unless all three are distinct primes in range.
    pub fn new(primes: [u32; 3]) -> Self {
        for (i, &p) in primes.iter().enumerate() {
            assert!((PRIME_LO..PRIME_HI).contains(&p) && is_prime(p), "{p} is not a prime in [2^30, 2^31)");
            assert!(!primes[..i].contains(&p), "primes must be distinct");
        }
        Self { primes }
    }

    /// The default set, drawn once per process.
    pub fn shared() -> &'static PrimeSet {
        static SHARED: OnceLock<PrimeSet> = OnceLock::new();
        SHARED.get_or_init(PrimeSet::default)
    }

    pub fn primes(&self) -> &[u32; 3] {
        &self.primes
    }
}

impl Default for PrimeSet {
    fn default() -> Self {
        Self::from_seed(DEFAULT_PRIME_SEED)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_matches_trial_division() {
        let trial = |n: u32| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
        for n in 0..5000 {
            assert_eq!(is_prime(n), trial(n), "n = {n}");
        }
        for n in (PRIME_HI - 2000)..PRIME_HI {
            assert_eq!(is_prime(n), trial(n), "n = {n}");
        }
        assert!(is_prime(2_147_483_647));
        // strong pseudoprime to bases 2 and 7 only
        assert!(!is_prime(25_326_001));
    }

    #[test]
    fn prime_sets_are_distinct_and_in_range() {
        for seed in 0..20 {
            let set = PrimeSet::from_seed(seed);
            let [a, b, c] = *set.primes();
            assert!(a != b && b != c && a != c);
            for p in [a, b, c] {
                assert!((PRIME_LO..PRIME_HI).contains(&p) && is_prime(p));
            }
        }
        assert_eq!(PrimeSet::default(), PrimeSet::default());
    }
}
