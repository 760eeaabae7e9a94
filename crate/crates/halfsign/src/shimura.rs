//! The divisor-sum correspondence between half-integral weight coefficients
//! and their integral-weight lifts, and the sign statistics built on it.
//!
//! Everything is carried at the integer scaling `A(n) = a(t n^2) / a(t)`,
//! which satisfies the exact pair of identities
//!
//! ```text
//! c(n) = sum over d | n of  chi_t(d) d^{k-1} A(n/d)
//! A(n) = sum over d | n of  mu(d) chi_t(d) d^{k-1} c(n/d)
//! ```
//!
//! against the eigenvalue table `c`. The normalized view
//! `a*(n) = A(n) / n^{k-1/2}` exists only as a float for report layers and
//! is guarded so its sign always matches the exact integer sign.
//!
//! The twisted character is `chi_t(d) = chi(d) * ((-1)^k t / d)` with the
//! second factor a Kronecker symbol. For `d` sharing a factor with `t` but
//! not with the level, the underlying theory does not pin the value down;
//! this crate follows the Kronecker convention (the symbol vanishes there).
//! See [`FormInstance::twist_character`].

use crate::arithfn::{self, ArithError, CoefficientTable, FactorSieve};
use crate::eigenform::{self, big_to_f64, EigenError, EigenvalueTable, LiftBackend};
use crate::friable::ModulusContext;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Largest half-integral weight `k + 1/2` supported by the float view.
pub const MAX_K: u32 = 26;

#[derive(Debug, Error)]
pub enum ShimuraError {
    #[error("level {0} must be a positive multiple of 4")]
    BadLevel(u64),
    #[error("twist parameter t = {0} must be a positive square-free integer")]
    BadTwist(u64),
    #[error("k = {0} outside supported range 1..={MAX_K}")]
    BadWeight(u32),
    #[error("backend weight {backend} does not match 2k = {expected}")]
    WeightMismatch { backend: u32, expected: u32 },
    #[error("Kronecker character discriminant {0} must be nonzero and 0 or 1 mod 4")]
    BadDiscriminant(i64),
    #[error("index {n}: forward reconstruction disagrees with the eigenvalue table")]
    ForwardMismatch { n: u64 },
    #[error("{what} = {value} exceeds the table limit {max}")]
    OutOfRange {
        what: &'static str,
        value: u64,
        max: u64,
    },
    #[error("local factor identity fails at p = {p}, exponent {nu}")]
    EllIdentity { p: u64, nu: u32 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Real character attached to the form instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Character {
    Trivial,
    /// The quadratic character `(disc / .)`.
    Kronecker(i64),
}

impl Character {
    /// Value at `d`, vanishing off residues invertible mod `level`.
    fn eval(&self, d: u64, level: u64) -> i32 {
        if num_integer::gcd(d, level) != 1 {
            return 0;
        }
        match self {
            Character::Trivial => 1,
            Character::Kronecker(disc) => arithfn::kronecker(*disc, d),
        }
    }
}

/// A half-integral weight form instance: weight `k + 1/2`, level `N`
/// (a multiple of 4), real character, square-free twist index `t`, and the
/// integral-weight backend supplying the lift eigenvalues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormInstance {
    k: u32,
    level: u64,
    chi: Character,
    t: u64,
    backend: LiftBackend,
}

impl FormInstance {
    pub fn new(
        k: u32,
        level: u64,
        chi: Character,
        t: u64,
        backend: LiftBackend,
    ) -> Result<Self, ShimuraError> {
        if k < 1 || k > MAX_K {
            return Err(ShimuraError::BadWeight(k));
        }
        if level == 0 || level % 4 != 0 {
            return Err(ShimuraError::BadLevel(level));
        }
        if t == 0 || !is_squarefree_u64(t) {
            return Err(ShimuraError::BadTwist(t));
        }
        if let Character::Kronecker(d) = chi {
            if d == 0 || !(d.rem_euclid(4) == 0 || d.rem_euclid(4) == 1) {
                return Err(ShimuraError::BadDiscriminant(d));
            }
        }
        if backend.weight() != 2 * k {
            return Err(ShimuraError::WeightMismatch {
                backend: backend.weight(),
                expected: 2 * k,
            });
        }
        Ok(FormInstance {
            k,
            level,
            chi,
            t,
            backend,
        })
    }

    /// The default instance: `k = 6`, level 4, trivial character, `t = 1`,
    /// eigenvalues from the built-in weight-12 form.
    pub fn default_delta() -> FormInstance {
        FormInstance::new(6, 4, Character::Trivial, 1, LiftBackend::BuiltinDelta)
            .expect("default instance is valid")
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn chi(&self) -> &Character {
        &self.chi
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn backend(&self) -> &LiftBackend {
        &self.backend
    }

    /// The twisted character `chi_t(d) = chi(d) * ((-1)^k t / d)`.
    ///
    /// The Kronecker symbol fixes the value for every `d >= 1`; in
    /// particular it vanishes when `d` shares a factor with `t` even if
    /// that factor is prime to the level, which is a convention rather
    /// than a consequence of the underlying correspondence.
    pub fn twist_character(&self, d: u64) -> i32 {
        let signed_t = if self.k % 2 == 0 {
            self.t as i64
        } else {
            -(self.t as i64)
        };
        self.chi.eval(d, self.level) * arithfn::kronecker(signed_t, d)
    }
}

fn is_squarefree_u64(mut n: u64) -> bool {
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// Exact coefficient family `A(n)` for one form instance, together with the
/// eigenvalue table it was inverted from.
pub struct HalfIntegralTable {
    instance: FormInstance,
    sieve: FactorSieve,
    eigen: EigenvalueTable,
    a: CoefficientTable,
}

/// Builds `A(n)` for `n = 1..=limit` by Moebius inversion of the
/// divisor-sum correspondence against the backend eigenvalues.
pub fn halfintegral_coefficients(
    instance: FormInstance,
    limit: u64,
) -> Result<HalfIntegralTable, ShimuraError> {
    let eigen = eigenform::eigenvalue_table(instance.backend(), limit)?;
    let sieve = FactorSieve::new(limit.max(2))?;
    let kernel = inversion_kernel(&instance, &sieve, limit);
    let a = kernel.dirichlet_convolve(eigen.values(), "A")?;
    Ok(HalfIntegralTable {
        instance,
        sieve,
        eigen,
        a,
    })
}

/// `mu(d) chi_t(d) d^{k-1}` as a table; the inversion kernel.
fn inversion_kernel(instance: &FormInstance, sieve: &FactorSieve, limit: u64) -> CoefficientTable {
    let k = instance.k();
    CoefficientTable::from_fn("inversion-kernel", limit, |d| {
        let s = i32::from(sieve.moebius(d)) * instance.twist_character(d);
        if s == 0 {
            BigInt::zero()
        } else {
            BigInt::from(s) * BigInt::from(d).pow(k - 1)
        }
    })
}

/// `chi_t(d) d^{k-1}` as a table; the forward kernel.
fn forward_kernel(instance: &FormInstance, limit: u64) -> CoefficientTable {
    let k = instance.k();
    CoefficientTable::from_fn("forward-kernel", limit, |d| {
        let s = instance.twist_character(d);
        if s == 0 {
            BigInt::zero()
        } else {
            BigInt::from(s) * BigInt::from(d).pow(k - 1)
        }
    })
}

/// Sign census of `A(n)` over `n <= x` restricted to `gcd(n, N/2) = 1`.
///
/// `n_star` counts nonzero signs; `balance` is `|n_plus - n_minus| / n_star`
/// and is `None` when the census is empty.
#[derive(Clone, Debug)]
pub struct SignSummary {
    pub x: u64,
    pub n_star: u64,
    pub n_plus: u64,
    pub n_minus: u64,
    pub n_zero: u64,
    eps: Vec<i8>,
}

impl SignSummary {
    /// Raw sign of `A(n)`, unfiltered.
    pub fn eps(&self, n: u64) -> i8 {
        self.eps[n as usize]
    }

    pub fn balance(&self) -> Option<f64> {
        if self.n_star == 0 {
            None
        } else {
            Some((self.n_plus as f64 - self.n_minus as f64).abs() / self.n_star as f64)
        }
    }
}

/// Result of the first-negative-index search.
#[derive(Clone, Copy, Debug)]
pub struct FirstNegative {
    /// Smallest `n` with `gcd(n, N/2) = 1` and `A(n) < 0`, if one exists
    /// within the search bound.
    pub found: Option<u64>,
    pub search_bound: u64,
    /// `(k^2 N)^{9/20}`, the unconditional benchmark the index is measured
    /// against in reports. Never asserted.
    pub benchmark: f64,
}

/// Longest run of consecutive vanishing coefficients within `n <= x`.
#[derive(Clone, Copy, Debug)]
pub struct GapReport {
    pub x: u64,
    pub max_gap: u64,
    /// Index `n` such that `A(n+1) = ... = A(n+max_gap) = 0`.
    pub start: Option<u64>,
    /// `start^{7/17}`, the benchmark exponent for gap reports.
    pub benchmark: Option<f64>,
    /// True when the longest run is cut off by the table boundary.
    pub censored: bool,
}

/// Interval arithmetic bracket for the natural density of the
/// non-vanishing set.
#[derive(Clone, Copy, Debug)]
pub struct DensityEstimate {
    pub p_bound: u64,
    pub v_bound: u32,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct BalanceRow {
    pub x: u64,
    pub n_star: u64,
    pub n_plus: u64,
    pub n_minus: u64,
    pub n_zero: u64,
    pub balance: Option<f64>,
    /// `(log x)^{-1/4}`: the expected decay scale of the balance.
    pub envelope: f64,
}

/// The oscillation constant: `phi0` is the root of
/// `sin(phi) - phi cos(phi) = pi / 2` in `(0, pi)` and the constant is
/// `-cos(phi0) = 0.32867...`.
#[derive(Clone, Copy, Debug)]
pub struct HallTenenbaum {
    pub phi0: f64,
    pub constant: f64,
}

/// Computes the oscillation constant by bisection; `f(phi) = sin(phi) -
/// phi cos(phi)` is strictly increasing on `(0, pi)`.
pub fn hall_tenenbaum_constant() -> HallTenenbaum {
    let target = std::f64::consts::FRAC_PI_2;
    let f = |phi: f64| phi.sin() - phi * phi.cos() - target;
    let (mut lo, mut hi) = (0.0f64, std::f64::consts::PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let phi0 = 0.5 * (lo + hi);
    HallTenenbaum {
        phi0,
        constant: -phi0.cos(),
    }
}

#[derive(Clone, Copy, Debug)]
pub struct HtRow {
    pub x: u64,
    /// `|sum of eps(n) over n <= x|` with the coprimality filter.
    pub lhs: f64,
    /// `x exp(-K sum of 2/p over p <= x with A(p) < 0)`.
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct HtReport {
    pub constant: HallTenenbaum,
    pub rows: Vec<HtRow>,
}

/// Count of primes with negative lift eigenvalue.
#[derive(Clone, Copy, Debug)]
pub struct NegativePrimeDensity {
    pub x: u64,
    pub prime_count: u64,
    pub negative_count: u64,
    /// `negative_count / prime_count`.
    pub fraction: f64,
    /// `negative_count * log x / x`, the scale used by lower-bound results.
    pub lemma_ratio: f64,
}

/// Count of primes with vanishing lift eigenvalue.
#[derive(Clone, Copy, Debug)]
pub struct SerreCount {
    pub x: u64,
    pub count: u64,
    /// `x / (log x)^{5/4}`: the upper-bound scale such counts are compared
    /// against in reports.
    pub envelope: f64,
}

impl HalfIntegralTable {
    pub fn instance(&self) -> &FormInstance {
        &self.instance
    }

    pub fn limit(&self) -> u64 {
        self.a.limit()
    }

    pub fn sieve(&self) -> &FactorSieve {
        &self.sieve
    }

    pub fn eigen(&self) -> &EigenvalueTable {
        &self.eigen
    }

    pub fn a_table(&self) -> &CoefficientTable {
        &self.a
    }

    /// Exact scaled coefficient `A(n)`.
    pub fn a(&self, n: u64) -> &BigInt {
        self.a.get(n)
    }

    /// Exact lift eigenvalue `c(n)`.
    pub fn c(&self, n: u64) -> &BigInt {
        self.eigen.c(n)
    }

    /// Normalized view `a*(n) = A(n) / n^{k-1/2}`, guarded so the float
    /// sign matches the exact sign.
    pub fn a_star(&self, n: u64) -> f64 {
        let exact = self.a(n);
        let v = big_to_f64(exact) / (n as f64).powf(self.instance.k() as f64 - 0.5);
        let float_sign = if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        };
        let exact_sign = if exact.is_zero() {
            0
        } else if exact.is_negative() {
            -1
        } else {
            1
        };
        assert_eq!(
            float_sign, exact_sign,
            "float sign diverged from exact sign at n = {n}"
        );
        v
    }

    /// `A(p^nu)` computed locally from the eigenvalue recurrence; only the
    /// divisors `1` and `p` survive Moebius inversion at prime powers.
    pub fn a_prime_power(&self, p: u64, nu: u32) -> BigInt {
        if nu == 0 {
            return BigInt::one();
        }
        let k = self.instance.k();
        let head = self.eigen.prime_power(p, nu);
        let tw = self.instance.twist_character(p);
        if tw == 0 {
            return head;
        }
        head - BigInt::from(tw) * BigInt::from(p).pow(k - 1) * self.eigen.prime_power(p, nu - 1)
    }

    /// Re-derives every eigenvalue from `A` through the forward divisor sum
    /// and compares exactly. Returns the number of indices checked.
    pub fn verify_forward(&self) -> Result<u64, ShimuraError> {
        let limit = self.limit();
        let kernel = forward_kernel(&self.instance, limit);
        let rebuilt = kernel.dirichlet_convolve(&self.a, "c-rebuilt")?;
        for n in 1..=limit {
            if rebuilt.get(n) != self.c(n) {
                return Err(ShimuraError::ForwardMismatch { n });
            }
        }
        Ok(limit)
    }

    /// The census filter: indices sharing a factor with `level/2` are
    /// excluded from sign statistics and threshold scans.
    pub fn coprime_filter(&self, n: u64) -> bool {
        num_integer::gcd(n, self.instance.level() / 2) == 1
    }

    /// Sign census over `n <= x`.
    pub fn sign_sequence(&self, x: u64) -> SignSummary {
        let x = x.min(self.limit());
        let mut eps = vec![0i8; x as usize + 1];
        let (mut plus, mut minus, mut zero) = (0u64, 0u64, 0u64);
        for n in 1..=x {
            let s = self.a.sign(n);
            eps[n as usize] = s;
            if self.coprime_filter(n) {
                match s {
                    1 => plus += 1,
                    -1 => minus += 1,
                    _ => zero += 1,
                }
            }
        }
        SignSummary {
            x,
            n_star: plus + minus,
            n_plus: plus,
            n_minus: minus,
            n_zero: zero,
            eps,
        }
    }

    /// Scans for the smallest coprime index with `A(n) < 0`. Absence within
    /// the bound is reported explicitly, never as a sentinel value.
    pub fn first_negative_index(&self, search_bound: u64) -> FirstNegative {
        let bound = search_bound.min(self.limit());
        let mut found = None;
        for n in 1..=bound {
            if self.coprime_filter(n) && self.a.sign(n) < 0 {
                found = Some(n);
                break;
            }
        }
        let inst = &self.instance;
        let benchmark = ((inst.k() as f64).powi(2) * inst.level() as f64).powf(9.0 / 20.0);
        FirstNegative {
            found,
            search_bound: bound,
            benchmark,
        }
    }

    /// Longest run of consecutive zeros among `A(n)` for `n <= x`.
    pub fn vanishing_gaps(&self, x: u64) -> GapReport {
        let x = x.min(self.limit());
        let mut max_gap = 0u64;
        let mut start = None;
        let mut run = 0u64;
        for n in 1..=x {
            if self.a.sign(n) == 0 {
                run += 1;
                if run > max_gap {
                    max_gap = run;
                    start = Some(n - run);
                }
            } else {
                run = 0;
            }
        }
        let censored = run > 0 && run == max_gap;
        GapReport {
            x,
            max_gap,
            start,
            benchmark: start.map(|n| (n.max(1) as f64).powf(7.0 / 17.0)),
            censored,
        }
    }

    /// Brackets the density of `{n : A(n) != 0}` by truncating the Euler
    /// product over `p <= p_bound` at exponent `v_bound`. The truth lies in
    /// `[lower, upper]` whenever vanishing behaves multiplicatively beyond
    /// the horizon.
    pub fn density_rho_f(
        &self,
        p_bound: u64,
        v_bound: u32,
    ) -> Result<DensityEstimate, ShimuraError> {
        if p_bound > self.limit() {
            return Err(ShimuraError::OutOfRange {
                what: "p_bound",
                value: p_bound,
                max: self.limit(),
            });
        }
        let mut lower = 1.0f64;
        let mut upper = 1.0f64;
        for p in self.sieve.primes().take_while(|&p| p <= p_bound) {
            let pf = p as f64;
            let mut tail = 1.0f64; // sum of delta(p^nu) p^{-nu}, nu <= v_bound
            let mut pw = 1.0f64;
            for nu in 1..=v_bound {
                pw /= pf;
                if !self.a_prime_power(p, nu).is_zero() {
                    tail += pw;
                }
            }
            let lo = (1.0 - 1.0 / pf) * tail;
            let hi = lo + pw / pf; // + p^{-(v_bound+1)}
            lower *= lo;
            upper *= hi;
        }
        Ok(DensityEstimate {
            p_bound,
            v_bound,
            lower,
            upper,
        })
    }

    /// Balance rows at each requested `x` (sorted, deduplicated).
    pub fn sign_balance_report(&self, xs: &[u64]) -> Vec<BalanceRow> {
        let mut xs: Vec<u64> = xs.iter().map(|&x| x.min(self.limit())).collect();
        xs.sort_unstable();
        xs.dedup();
        let mut rows = Vec::with_capacity(xs.len());
        let (mut plus, mut minus, mut zero) = (0u64, 0u64, 0u64);
        let mut n = 1u64;
        for &x in &xs {
            while n <= x {
                if self.coprime_filter(n) {
                    match self.a.sign(n) {
                        1 => plus += 1,
                        -1 => minus += 1,
                        _ => zero += 1,
                    }
                }
                n += 1;
            }
            let n_star = plus + minus;
            rows.push(BalanceRow {
                x,
                n_star,
                n_plus: plus,
                n_minus: minus,
                n_zero: zero,
                balance: if n_star == 0 {
                    None
                } else {
                    Some((plus as f64 - minus as f64).abs() / n_star as f64)
                },
                envelope: (x as f64).ln().powf(-0.25),
            });
        }
        rows
    }

    /// Oscillation report: the filtered partial sums of `eps` against the
    /// decay predicted by the oscillation constant.
    pub fn hall_tenenbaum_report(&self, xs: &[u64]) -> HtReport {
        let constant = hall_tenenbaum_constant();
        let mut xs: Vec<u64> = xs.iter().map(|&x| x.min(self.limit())).collect();
        xs.sort_unstable();
        xs.dedup();
        let mut rows = Vec::with_capacity(xs.len());
        let mut signed = 0i64;
        let mut neg_reciprocal = 0.0f64;
        let mut n = 1u64;
        for &x in &xs {
            while n <= x {
                if self.coprime_filter(n) {
                    signed += i64::from(self.a.sign(n));
                }
                if self.sieve.is_prime(n) && self.a.sign(n) < 0 {
                    neg_reciprocal += 2.0 / n as f64;
                }
                n += 1;
            }
            let lhs = signed.unsigned_abs() as f64;
            let rhs = x as f64 * (-constant.constant * neg_reciprocal).exp();
            rows.push(HtRow {
                x,
                lhs,
                rhs,
                ratio: lhs / rhs,
            });
        }
        HtReport { constant, rows }
    }

    /// Census of primes `p <= x` with `A(p) < 0`: the sign of the
    /// half-integral coefficient at `t p^2`. The Sato-Tate measure is
    /// symmetric, so the fraction drifts toward one half.
    pub fn negative_prime_density(&self, x: u64) -> NegativePrimeDensity {
        let x = x.min(self.limit());
        let mut primes = 0u64;
        let mut negative = 0u64;
        for p in self.sieve.primes().take_while(|&p| p <= x) {
            primes += 1;
            if self.a.sign(p) < 0 {
                negative += 1;
            }
        }
        NegativePrimeDensity {
            x,
            prime_count: primes,
            negative_count: negative,
            fraction: if primes == 0 {
                0.0
            } else {
                negative as f64 / primes as f64
            },
            lemma_ratio: negative as f64 * (x as f64).ln() / x as f64,
        }
    }

    /// Census of primes `p <= x` with `A(p) = 0` exactly, equivalently
    /// `c(p)` equal to the twisted divisor term `tw(p) p^{k-1}`. Thin for
    /// non-CM lifts: the count is bounded by `x / (log x)^{5/4}`.
    pub fn serre_exceptional_count(&self, x: u64) -> SerreCount {
        let x = x.min(self.limit());
        let count = self
            .sieve
            .primes()
            .take_while(|&p| p <= x)
            .filter(|&p| self.a.sign(p) == 0)
            .count() as u64;
        SerreCount {
            x,
            count,
            envelope: x as f64 / (x as f64).ln().powf(1.25),
        }
    }
}

/// One local factor value `numerator * p^{-half_exp / 2}` in cleared exact
/// form, plus its float view.
#[derive(Clone, Debug)]
pub struct EllValue {
    pub nu: u32,
    pub numerator: BigInt,
    pub half_exp: u32,
    pub value: f64,
}

/// Local factors of the compensating function at one prime.
#[derive(Clone, Debug)]
pub struct EllFactors {
    pub p: u64,
    /// Whether `p` avoids the sieve modulus of `ctx`, i.e. whether this
    /// column contributes to the restricted series.
    pub in_restricted_support: bool,
    /// `|g(p)| + |h(p)| + |g(p) h(p)|`: the base of the growth envelope
    /// `|ell(p^nu)| <= growth_base^nu`.
    pub growth_base: f64,
    pub values: Vec<EllValue>,
}

/// Exact value `num * p^{-half_exp/2}`. Sums only combine values whose
/// half-exponents share parity; the recurrence below preserves that parity
/// by construction.
#[derive(Clone, Debug)]
struct HalfPower {
    num: BigInt,
    half_exp: u32,
}

impl HalfPower {
    fn zero(half_exp: u32) -> Self {
        HalfPower {
            num: BigInt::zero(),
            half_exp,
        }
    }

    fn add(&self, other: &HalfPower, p: u64) -> HalfPower {
        if self.num.is_zero() {
            return other.clone();
        }
        if other.num.is_zero() {
            return self.clone();
        }
        let (small, large) = if self.half_exp <= other.half_exp {
            (self, other)
        } else {
            (other, self)
        };
        let diff = large.half_exp - small.half_exp;
        assert!(diff % 2 == 0, "half-exponent parity mismatch");
        let scaled = &small.num * BigInt::from(p).pow(diff / 2);
        HalfPower {
            num: scaled + &large.num,
            half_exp: large.half_exp,
        }
    }

    fn mul(&self, other: &HalfPower) -> HalfPower {
        HalfPower {
            num: &self.num * &other.num,
            half_exp: self.half_exp + other.half_exp,
        }
    }

    fn neg(&self) -> HalfPower {
        HalfPower {
            num: -&self.num,
            half_exp: self.half_exp,
        }
    }

    fn equals(&self, other: &HalfPower, p: u64) -> bool {
        if self.num.is_zero() || other.num.is_zero() {
            return self.num.is_zero() && other.num.is_zero();
        }
        if (self.half_exp % 2) != (other.half_exp % 2) {
            return false;
        }
        let (small, large) = if self.half_exp <= other.half_exp {
            (self, other)
        } else {
            (other, self)
        };
        &small.num * BigInt::from(p).pow((large.half_exp - small.half_exp) / 2) == large.num
    }

    fn to_f64(&self, p: u64) -> f64 {
        big_to_f64(&self.num) * (p as f64).powf(-(self.half_exp as f64) / 2.0)
    }
}

/// Local factors `ell(p^nu)` for `nu = 0..=v_max` in cleared exact form.
///
/// The column satisfies `ell(1) = 1`, `ell(p) = 0`, and
/// `ell(p^nu) = -[ell(p^{nu-1}) (g(p) + h(p)) + ell(p^{nu-2}) g(p) h(p)]`,
/// where `g(p) = chi_t(p) / sqrt(p)` and `h(p) = a*(p)`. Before returning,
/// the full convolution `(g * h * ell)(p^nu)` is re-checked exactly: it must
/// equal `c(p)/p^{(2k-1)/2}` at `nu = 1` and vanish for `nu >= 2`.
///
/// The recurrence is meaningful at every prime; `ctx` only marks whether the
/// column lies in the support of the restricted series.
pub fn ell_local_factors(
    tab: &HalfIntegralTable,
    ctx: &ModulusContext,
    p: u64,
    v_max: u32,
) -> Result<EllFactors, ShimuraError> {
    if !tab.sieve.is_prime(p) {
        return Err(ShimuraError::NotPrime(p));
    }
    let k = tab.instance.k();
    let two_k_minus_1 = 2 * k - 1;
    let tw = tab.instance.twist_character(p);

    // g(p) and h(p) share the denominator p^{(2k-1)/2}:
    //   g(p) = tw(p) p^{k-1} * p^{-(2k-1)/2},  h(p) = A(p) * p^{-(2k-1)/2}.
    let g = HalfPower {
        num: BigInt::from(tw) * BigInt::from(p).pow(k - 1),
        half_exp: two_k_minus_1,
    };
    let h = HalfPower {
        num: tab.a(p).clone(),
        half_exp: two_k_minus_1,
    };
    let g_plus_h = g.add(&h, p);
    let gh = g.mul(&h);

    let mut ell: Vec<HalfPower> = Vec::with_capacity(v_max as usize + 1);
    ell.push(HalfPower {
        num: BigInt::one(),
        half_exp: 0,
    });
    if v_max >= 1 {
        ell.push(HalfPower::zero(two_k_minus_1));
    }
    for nu in 2..=v_max {
        let a = ell[nu as usize - 1].mul(&g_plus_h);
        let b = ell[nu as usize - 2].mul(&gh);
        ell.push(a.add(&b, p).neg());
    }

    // Re-check the defining convolution in exact arithmetic.
    let one = HalfPower {
        num: BigInt::one(),
        half_exp: 0,
    };
    for nu in 0..=v_max {
        let mut acc = HalfPower::zero(0);
        for (gi, gv) in [(0u32, &one), (1, &g)] {
            for (hj, hv) in [(0u32, &one), (1, &h)] {
                if gi + hj > nu {
                    continue;
                }
                let term = gv.mul(hv).mul(&ell[(nu - gi - hj) as usize]);
                acc = acc.add(&term, p);
            }
        }
        let expected = match nu {
            0 => one.clone(),
            1 => HalfPower {
                num: tab.c(p).clone(),
                half_exp: two_k_minus_1,
            },
            _ => HalfPower::zero(0),
        };
        if !acc.equals(&expected, p) {
            return Err(ShimuraError::EllIdentity { p, nu });
        }
    }

    let gf = g.to_f64(p).abs();
    let hf = h.to_f64(p).abs();
    let growth_base = gf + hf + gf * hf;
    let values = ell
        .iter()
        .enumerate()
        .map(|(nu, v)| EllValue {
            nu: nu as u32,
            numerator: v.num.clone(),
            half_exp: v.half_exp,
            value: v.to_f64(p),
        })
        .collect();

    Ok(EllFactors {
        p,
        in_restricted_support: !ctx.divides_modulus(p),
        growth_base,
        values,
    })
}
