//! Square-free friable counting against a sieve modulus.
//!
//! `xi_count` is the exact census of square-free `y`-smooth integers up to
//! `x` that are coprime to a set of primes `q`. Its density prediction is
//! `Pi_q * y^u * rho(u)` with `u = log x / log y`, where `Pi_q` is the
//! density of square-free integers coprime to `q` and `rho` is the smooth
//! density function from [`crate::dickman`].
//!
//! [`ModulusContext`] packages the modulus those counts are taken against
//! in the positivity arguments: the product of all primes up to the square
//! of the logarithmic scale, together with the primes dividing half the
//! level.

use crate::arithfn::{self, FactorSieve};
use crate::dickman::DickmanTable;
use crate::shimura::FormInstance;
use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FriableError {
    #[error("x = {x} exceeds the sieve limit {limit}")]
    OutOfRange { x: u64, limit: u64 },
    #[error("smoothness bound y must be at least 1")]
    BadSmoothness,
    #[error("modulus entry {0} is not prime")]
    InvalidModulus(u64),
    #[error("u = {0} outside the solved density range")]
    BadArgument(f64),
}

/// The sieve modulus: all primes up to `floor(L^2)` where
/// `L = log(c0 * k * N)`, together with the primes dividing `N/2`.
#[derive(Clone, Debug)]
pub struct ModulusContext {
    c0: u64,
    log_scale: f64,
    smooth_bound: u64,
    primes: Vec<u64>,
    modulus: BigInt,
}

impl ModulusContext {
    /// `c0` is the scale constant inside the logarithm; it must be positive
    /// (the conventional default is 100).
    pub fn new(instance: &FormInstance, c0: u64) -> ModulusContext {
        assert!(c0 >= 1, "scale constant c0 must be positive");
        let log_scale = ((c0 as f64) * (instance.k() as f64) * (instance.level() as f64)).ln();
        let smooth_bound = (log_scale * log_scale).floor() as u64;
        let mut primes: Vec<u64> = if smooth_bound >= 2 {
            FactorSieve::new(smooth_bound)
                .expect("smooth bound within sieve capacity")
                .primes()
                .collect()
        } else {
            Vec::new()
        };
        // Prime factors of N/2 by trial division; the level is small.
        let mut m = instance.level() / 2;
        let mut p = 2u64;
        while p * p <= m {
            if m % p == 0 {
                primes.push(p);
                while m % p == 0 {
                    m /= p;
                }
            }
            p += 1;
        }
        if m > 1 {
            primes.push(m);
        }
        primes.sort_unstable();
        primes.dedup();
        let modulus = primes.iter().fold(BigInt::one(), |acc, &p| acc * p);
        ModulusContext {
            c0,
            log_scale,
            smooth_bound,
            primes,
            modulus,
        }
    }

    pub fn c0(&self) -> u64 {
        self.c0
    }

    /// The logarithmic scale `L = log(c0 k N)`.
    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// `floor(L^2)`: primes up to this bound enter the modulus.
    pub fn smooth_bound(&self) -> u64 {
        self.smooth_bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn omega(&self) -> usize {
        self.primes.len()
    }

    /// `log(omega + 3)`: the logarithmic scale of the modulus itself.
    pub fn l_q(&self) -> f64 {
        ((self.omega() + 3) as f64).ln()
    }

    pub fn divides_modulus(&self, p: u64) -> bool {
        self.primes.binary_search(&p).is_ok()
    }

    /// The modulus as an exact integer (it overflows u64 quickly).
    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }
}

/// Exact count of square-free `y`-smooth `n <= x` coprime to `q`.
#[derive(Clone, Debug)]
pub struct FriableCount {
    pub x: u64,
    pub y: u64,
    pub q_primes: Vec<u64>,
    pub count: u64,
}

/// Whether `n` is square-free, `y`-smooth, and coprime to the listed primes.
/// One walk over the stored factorisation decides all three.
pub(crate) fn xi_indicator(sieve: &FactorSieve, n: u64, y: u64, q_primes: &[u64]) -> bool {
    let mut m = n;
    while m > 1 {
        let p = sieve.smallest_prime_factor(m);
        if p > y || q_primes.binary_search(&p).is_ok() {
            return false;
        }
        m /= p;
        if m % p == 0 {
            return false;
        }
    }
    true
}

fn validated_q(q_primes: &[u64]) -> Result<Vec<u64>, FriableError> {
    let mut q = q_primes.to_vec();
    q.sort_unstable();
    q.dedup();
    for &p in &q {
        if !arithfn::is_prime(p) {
            return Err(FriableError::InvalidModulus(p));
        }
    }
    Ok(q)
}

/// Counts square-free `y`-smooth integers `n <= x` coprime to every prime
/// in `q_primes`. `n = 1` always qualifies.
pub fn xi_count(
    sieve: &FactorSieve,
    x: u64,
    y: u64,
    q_primes: &[u64],
) -> Result<FriableCount, FriableError> {
    if x > sieve.limit() {
        return Err(FriableError::OutOfRange {
            x,
            limit: sieve.limit(),
        });
    }
    if y < 1 {
        return Err(FriableError::BadSmoothness);
    }
    let q = validated_q(q_primes)?;
    let count = (1..=x)
        .into_par_iter()
        .filter(|&n| xi_indicator(sieve, n, y, &q))
        .count() as u64;
    Ok(FriableCount {
        x,
        y,
        q_primes: q,
        count,
    })
}

/// Density of square-free integers coprime to `q`:
/// `(6 / pi^2) * prod over p | q of p / (p + 1)`.
pub fn pi_q(q_primes: &[u64]) -> Result<f64, FriableError> {
    let q = validated_q(q_primes)?;
    let base = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
    Ok(q.iter()
        .fold(base, |acc, &p| acc * p as f64 / (p as f64 + 1.0)))
}

/// The same density as a finite product over primes `p <= p_bound`;
/// converges to [`pi_q`] as the bound grows. Used to cross-check the
/// closed form.
pub fn pi_q_truncated(q_primes: &[u64], p_bound: u64) -> Result<f64, FriableError> {
    let q = validated_q(q_primes)?;
    let sieve = FactorSieve::new(p_bound.max(2)).map_err(|_| FriableError::OutOfRange {
        x: p_bound,
        limit: arithfn::MAX_SIEVE_LIMIT,
    })?;
    let mut acc = 1.0f64;
    for p in sieve.primes() {
        let pf = p as f64;
        if q.binary_search(&p).is_ok() {
            acc *= 1.0 - 1.0 / pf;
        } else {
            acc *= 1.0 - 1.0 / (pf * pf);
        }
    }
    Ok(acc)
}

/// One comparison row of the exact friable count against its density
/// prediction at `x = y^u`.
#[derive(Clone, Debug)]
pub struct Lemma41Row {
    pub y: u64,
    pub u: f64,
    /// `floor(y^u)`: the integer cutoff actually counted.
    pub x: u64,
    pub count: u64,
    pub pi_q: f64,
    /// `pi_q * y^u * rho(u)`.
    pub predicted: f64,
    pub ratio: f64,
    /// `L_q^{e+2} / sqrt(log y)` with `L_q = log(omega(q) + 3)`: the scale
    /// of the relative error term. Advisory only; the constant in front is
    /// not effective.
    pub envelope: f64,
}

/// Compares the exact count at `x = y^u` with the density prediction.
pub fn lemma41_ratio(
    sieve: &FactorSieve,
    rho: &DickmanTable,
    y: u64,
    u: f64,
    q_primes: &[u64],
) -> Result<Lemma41Row, FriableError> {
    if y < 2 {
        return Err(FriableError::BadSmoothness);
    }
    if u.is_nan() || u < 0.0 || u > rho.u_max() {
        return Err(FriableError::BadArgument(u));
    }
    let x_real = (y as f64).powf(u);
    let x = x_real.floor() as u64;
    let counted = xi_count(sieve, x, y, q_primes)?;
    let density = pi_q(q_primes)?;
    let predicted = density * x_real * rho.rho(u);
    let omega = counted.q_primes.len();
    let l_q = ((omega + 3) as f64).ln();
    Ok(Lemma41Row {
        y,
        u,
        x,
        count: counted.count,
        pi_q: density,
        predicted,
        ratio: counted.count as f64 / predicted,
        envelope: l_q.powf(std::f64::consts::E + 2.0) / (y as f64).ln().sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sieve(limit: u64) -> FactorSieve {
        FactorSieve::new(limit).unwrap()
    }

    #[test]
    fn default_context_shape() {
        let inst = FormInstance::default_delta();
        let ctx = ModulusContext::new(&inst, 100);
        assert!((ctx.log_scale() - 2400f64.ln()).abs() < 1e-12);
        assert_eq!(ctx.smooth_bound(), 60);
        let expect: Vec<u64> = vec![
            2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59,
        ];
        assert_eq!(ctx.primes(), &expect[..]);
        assert_eq!(ctx.omega(), 17);
        assert!((ctx.l_q() - 20f64.ln()).abs() < 1e-12);
        assert!(ctx.divides_modulus(2));
        assert!(ctx.divides_modulus(59));
        assert!(!ctx.divides_modulus(61));
        // Primorial of 59 has 22 digits; spot check divisibility instead.
        assert_eq!(ctx.modulus() % BigInt::from(59), BigInt::from(0));
    }

    #[test]
    fn small_scale_context_keeps_level_primes() {
        let inst = FormInstance::default_delta();
        let ctx = ModulusContext::new(&inst, 1);
        // L = log 24, L^2 = 10.1: primes {2,3,5,7} already include N/2 = 2.
        assert_eq!(ctx.smooth_bound(), 10);
        assert_eq!(ctx.primes(), &[2, 3, 5, 7]);
    }

    #[test]
    fn xi_small_examples() {
        let s = sieve(10_000);
        // Square-free 10-smooth up to 10: {1,2,3,5,6,7,10}.
        assert_eq!(xi_count(&s, 10, 10, &[]).unwrap().count, 7);
        // Odd members only: {1,3,5,7}.
        assert_eq!(xi_count(&s, 10, 10, &[2]).unwrap().count, 4);
        // y >= x and q empty degenerates to the square-free count.
        let sf = (1..=100u64).filter(|&n| s.is_squarefree(n)).count() as u64;
        assert_eq!(xi_count(&s, 100, 100, &[]).unwrap().count, sf);
        assert_eq!(sf, 61);
        // 7-smooth square-free numbers are subset products of {2,3,5,7}.
        assert_eq!(xi_count(&s, 10_000, 7, &[]).unwrap().count, 16);
    }

    #[test]
    fn xi_matches_trial_division_oracle() {
        let s = sieve(2000);
        let brute = |x: u64, y: u64, q: &[u64]| -> u64 {
            (1..=x)
                .filter(|&n| {
                    let mut m = n;
                    let mut p = 2u64;
                    while p * p <= m {
                        if m % p == 0 {
                            m /= p;
                            if m % p == 0 || p > y || q.contains(&p) {
                                return false;
                            }
                        }
                        p += 1;
                    }
                    m == 1 || (m <= y && !q.contains(&m))
                })
                .count() as u64
        };
        for y in [10u64, 31, 2000] {
            for q in [&[][..], &[2][..], &[2, 3, 5][..]] {
                assert_eq!(
                    xi_count(&s, 2000, y, q).unwrap().count,
                    brute(2000, y, q),
                    "y = {y}, q = {q:?}"
                );
            }
        }
    }

    #[test]
    fn xi_ignores_moduli_beyond_x() {
        let s = sieve(1000);
        let with = xi_count(&s, 1000, 1000, &[1009]).unwrap().count;
        let without = xi_count(&s, 1000, 1000, &[]).unwrap().count;
        assert_eq!(with, without);
    }

    #[test]
    fn xi_monotone_in_smoothness() {
        let s = sieve(5000);
        let mut prev = 0u64;
        for y in [2u64, 5, 10, 50, 100, 5000] {
            let c = xi_count(&s, 5000, y, &[]).unwrap().count;
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn xi_errors() {
        let s = sieve(100);
        assert!(matches!(
            xi_count(&s, 1000, 10, &[]),
            Err(FriableError::OutOfRange { .. })
        ));
        assert!(matches!(
            xi_count(&s, 100, 0, &[]),
            Err(FriableError::BadSmoothness)
        ));
        assert!(matches!(
            xi_count(&s, 100, 10, &[6]),
            Err(FriableError::InvalidModulus(6))
        ));
    }

    #[test]
    fn pi_q_closed_forms() {
        let base = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
        assert!((pi_q(&[]).unwrap() - base).abs() < 1e-15);
        assert!((pi_q(&[2]).unwrap() - base * 2.0 / 3.0).abs() < 1e-15);
        // q = 30: factor (2/3)(3/4)(5/6) = 5/12.
        assert!((pi_q(&[2, 3, 5]).unwrap() - base * 5.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn pi_q_truncated_converges_to_closed_form() {
        for q in [&[][..], &[2][..], &[2, 3, 5][..]] {
            let exact = pi_q(q).unwrap();
            let approx = pi_q_truncated(q, 1_000_000).unwrap();
            assert!((exact - approx).abs() < 1e-6, "q = {q:?}");
        }
    }

    #[test]
    fn lemma41_near_unity_at_unit_u() {
        let s = sieve(40_000);
        let rho = DickmanTable::solve(3.0, 0.005).unwrap();
        let row = lemma41_ratio(&s, &rho, 1000, 1.0, &[]).unwrap();
        assert_eq!(row.x, 1000);
        assert!((row.ratio - 1.0).abs() < 0.01, "ratio = {}", row.ratio);
        assert!(row.envelope > 0.0);
    }

    #[test]
    fn lemma41_rejects_out_of_range_u() {
        let s = sieve(1000);
        let rho = DickmanTable::solve(2.0, 0.01).unwrap();
        assert!(matches!(
            lemma41_ratio(&s, &rho, 10, 3.0, &[]),
            Err(FriableError::BadArgument(_))
        ));
    }
}
