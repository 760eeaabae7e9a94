//! Log-weighted summatory machinery.
//!
//! The lower-bound argument for sign changes runs through an auxiliary
//! multiplicative function `h` that is banded by prime size: zero on the
//! context modulus, mildly positive up to `sqrt(y)`, mildly negative up to
//! `y`, and strongly negative beyond. Convolving its inverse against the
//! normalized coefficients `a*(n)` on square-free support gives a
//! multiplicative `g` with `a* mu^2 = g * h`; when `g` is nonnegative on
//! the support, the weighted summatory `S(x)` dominates the pure `h` sum.
//! This module computes every piece of that chain and reports where the
//! hypotheses hold, fail, or are empty.

use crate::arithfn::FactorSieve;
use crate::friable::ModulusContext;
use crate::shimura::HalfIntegralTable;
use rayon::prelude::*;
use thiserror::Error;

/// Exponent in the upper-bound envelope `(k^2 N)^{1/4 + eps} sqrt(x)`.
pub const PROP1_EPSILON: f64 = 0.05;

#[derive(Debug, Error)]
pub enum HsumError {
    #[error("band threshold must be positive, got {0}")]
    BadThreshold(u64),
    #[error("band constant must be a positive finite float, got {0}")]
    BadConstant(f64),
}

/// The banded multiplicative function `h`. Its value at a prime depends
/// only on which band the prime falls in; higher prime powers all map to
/// zero, so the support is exactly the square-free integers coprime to the
/// context modulus.
#[derive(Clone, Debug)]
pub struct HFunction {
    ctx: ModulusContext,
    y: u64,
    c: f64,
}

impl HFunction {
    pub fn new(ctx: ModulusContext, y: u64, c: f64) -> Result<HFunction, HsumError> {
        if y == 0 {
            return Err(HsumError::BadThreshold(y));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(HsumError::BadConstant(c));
        }
        Ok(HFunction { ctx, y, c })
    }

    pub fn ctx(&self) -> &ModulusContext {
        &self.ctx
    }

    pub fn y(&self) -> u64 {
        self.y
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Value at a prime. The modulus test runs first, so context primes are
    /// dead regardless of size; every prime below the smooth bound is in
    /// the modulus by construction, which is what makes the bands total.
    pub fn prime_value(&self, p: u64) -> f64 {
        debug_assert!(crate::arithfn::is_prime(p), "prime_value({p})");
        if self.ctx.divides_modulus(p) {
            return 0.0;
        }
        let scale = self.ctx.log_scale();
        if p > self.y {
            -2.0 - self.c / scale
        } else if p.saturating_mul(p) > self.y {
            -self.c / scale
        } else {
            1.0 - self.c / scale
        }
    }

    /// Multiplicative value at `n`: zero off square-free integers coprime
    /// to the modulus, the product of prime band values otherwise.
    pub fn value(&self, sieve: &FactorSieve, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let mut acc = 1.0;
        let mut m = n;
        while m > 1 {
            let p = sieve.smallest_prime_factor(m);
            m /= p;
            if m % p == 0 || self.ctx.divides_modulus(p) {
                return 0.0;
            }
            acc *= self.prime_value(p);
        }
        acc
    }
}

/// Largest prefix of the census on which the coefficients stay nonnegative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PositivityThreshold {
    /// All census indices `n <= y_f` have `A(n) >= 0`.
    pub y_f: u64,
    /// First census index with `A(n) < 0`, if the table contains one.
    pub witness: Option<u64>,
}

/// Scans the census (square-free or not, subject only to the coprimality
/// filter) for the first negative coefficient.
pub fn compute_y_f(tab: &HalfIntegralTable) -> PositivityThreshold {
    for n in 1..=tab.limit() {
        if tab.coprime_filter(n) && tab.a_table().sign(n) < 0 {
            return PositivityThreshold {
                y_f: n - 1,
                witness: Some(n),
            };
        }
    }
    PositivityThreshold {
        y_f: tab.limit(),
        witness: None,
    }
}

fn squarefree_coprime(sieve: &FactorSieve, ctx: &ModulusContext, n: u64) -> bool {
    let mut m = n;
    while m > 1 {
        let p = sieve.smallest_prime_factor(m);
        m /= p;
        if m % p == 0 || ctx.divides_modulus(p) {
            return false;
        }
    }
    true
}

/// The weighted summatory `S(x)`: sum of `a*(n) log(x/n)` over square-free
/// `n <= x` coprime to the context modulus. `x` is a real threshold, so the
/// function is continuous in `x` (each new term enters with weight zero).
/// Requires `x <= tab.limit()`. Summation order is fixed for
/// reproducibility.
pub fn summatory_s(tab: &HalfIntegralTable, ctx: &ModulusContext, x: f64) -> f64 {
    assert!(x.is_finite(), "summatory threshold must be finite");
    if x < 1.0 {
        return 0.0;
    }
    let bound = x.floor() as u64;
    assert!(
        bound <= tab.limit(),
        "summatory threshold {x} beyond table limit {}",
        tab.limit()
    );
    let sieve = tab.sieve();
    let mut acc = 0.0;
    for n in 1..=bound {
        if squarefree_coprime(sieve, ctx, n) {
            acc += tab.a_star(n) * (x / n as f64).ln();
        }
    }
    acc
}

/// The pure band-function sum `sum_{n <= y^u} h(n) log(y^u / n)`, the left
/// side of the crossover prediction. Requires `y^u <= 10^7` and a sieve
/// covering that range.
pub fn h_weighted_sum(h: &HFunction, sieve: &FactorSieve, u: f64) -> f64 {
    let x = (h.y() as f64).powf(u);
    assert!(
        x.is_finite() && x <= 1e7 * (1.0 + 1e-12),
        "h-sum threshold {x} out of range"
    );
    let bound = x.floor() as u64;
    assert!(
        bound <= sieve.limit(),
        "h-sum threshold {x} beyond sieve limit {}",
        sieve.limit()
    );
    let mut acc = 0.0;
    for n in 1..=bound {
        let v = h.value(sieve, n);
        if v != 0.0 {
            acc += v * (x / n as f64).ln();
        }
    }
    acc
}

/// `g(p) = a*(p) - h(p)`, the prime value of the deconvolution.
pub fn g_prime(tab: &HalfIntegralTable, h: &HFunction, p: u64) -> f64 {
    tab.a_star(p) - h.prime_value(p)
}

/// `g(p^nu)`. The convolution identity forces `g(p^nu) = -h(p) g(p^{nu-1})`
/// beyond the first power; the product is accumulated iteratively so the
/// recurrence holds bitwise, not just approximately.
pub fn g_prime_power(tab: &HalfIntegralTable, h: &HFunction, p: u64, nu: u32) -> f64 {
    if nu == 0 {
        return 1.0;
    }
    let mut acc = g_prime(tab, h, p);
    for _ in 1..nu {
        acc *= -h.prime_value(p);
    }
    acc
}

/// Multiplicative extension of `g` to arbitrary `n <= tab.limit()`.
pub fn g_at(tab: &HalfIntegralTable, h: &HFunction, n: u64) -> f64 {
    assert!(n >= 1 && n <= tab.limit());
    let mut acc = 1.0;
    for (p, nu) in tab.sieve().factorize(n) {
        acc *= g_prime_power(tab, h, p, nu);
    }
    acc
}

/// Minima of `g` at primes up to `x`: over all primes, and over the primes
/// outside the modulus (the only ones that can appear in the square-free
/// coprime support the chain argument sums over).
#[derive(Clone, Copy, Debug)]
pub struct GReport {
    pub x: u64,
    /// `(argmin, min)` over all primes `<= x`, if any.
    pub overall: Option<(u64, f64)>,
    /// `(argmin, min)` over primes `<= x` outside the modulus.
    pub supported: Option<(u64, f64)>,
}

impl GReport {
    /// The chain hypothesis: `g >= 0` wherever the support can see it.
    pub fn supported_nonnegative(&self) -> bool {
        self.supported.is_none_or(|(_, v)| v >= 0.0)
    }
}

pub fn deconvolve_g(tab: &HalfIntegralTable, h: &HFunction, x: u64) -> GReport {
    assert!(x <= tab.limit());
    let mut overall: Option<(u64, f64)> = None;
    let mut supported: Option<(u64, f64)> = None;
    for p in tab.sieve().primes().take_while(|&p| p <= x) {
        let v = g_prime(tab, h, p);
        if overall.is_none_or(|(_, best)| v < best) {
            overall = Some((p, v));
        }
        if !h.ctx().divides_modulus(p) && supported.is_none_or(|(_, best)| v < best) {
            supported = Some((p, v));
        }
    }
    GReport {
        x,
        overall,
        supported,
    }
}

/// One grid point of the upper-bound envelope check.
#[derive(Clone, Copy, Debug)]
pub struct Prop1Row {
    pub x: f64,
    pub s: f64,
    pub envelope: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct Prop1Report {
    pub rows: Vec<Prop1Row>,
    pub epsilon: f64,
    /// Advisory: the last ratio exceeds ten times the first, suggesting the
    /// envelope is not holding over this grid.
    pub blowup: bool,
}

/// `|S(x)| / ((k^2 N)^{1/4+eps} sqrt(x))` across a grid. The implied
/// constant in the bound is unknown, so this only reports ratios and flags
/// clear growth; it cannot fail in isolation.
pub fn prop1_ratio_report(
    tab: &HalfIntegralTable,
    ctx: &ModulusContext,
    grid: &[f64],
) -> Prop1Report {
    let inst = tab.instance();
    let scale = ((inst.k() as f64).powi(2) * inst.level() as f64).powf(0.25 + PROP1_EPSILON);
    let rows: Vec<Prop1Row> = grid
        .par_iter()
        .map(|&x| {
            let s = summatory_s(tab, ctx, x);
            let envelope = scale * x.sqrt();
            Prop1Row {
                x,
                s,
                envelope,
                ratio: s.abs() / envelope,
            }
        })
        .collect();
    let blowup = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) if rows.len() > 1 => b.ratio > 10.0 * a.ratio,
        _ => false,
    };
    Prop1Report {
        rows,
        epsilon: PROP1_EPSILON,
        blowup,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainStatus {
    /// Hypotheses held and the inequality was verified with content.
    Holds,
    /// The inequality holds but no prime enters the support below the
    /// threshold: both sides degenerate to the `n = 1` term.
    Vacuous,
    /// A hypothesis failed (mismatched band threshold, or `g < 0` at a
    /// supported prime), so the inequality is not claimed.
    Inapplicable,
    /// Hypotheses held yet the inequality failed.
    Violated,
}

#[derive(Clone, Copy, Debug)]
pub struct Prop2Report {
    pub status: ChainStatus,
    pub y_f: u64,
    pub witness: Option<u64>,
    pub u: f64,
    pub x: f64,
    /// `S(y_f^u)`.
    pub lhs: f64,
    /// `sum h(n) log(y_f^u / n)`.
    pub rhs: f64,
    pub supported_min_g: Option<(u64, f64)>,
}

/// The chain inequality `S(y_f^u) >= sum_{n <= y_f^u} h(n) log(y_f^u/n)`,
/// valid when `h` is built at the positivity threshold and `g` is
/// nonnegative at every supported prime in range. Requires
/// `y_f^u <= tab.limit()`.
pub fn prop2_chain_check(tab: &HalfIntegralTable, h: &HFunction, u: f64) -> Prop2Report {
    let threshold = compute_y_f(tab);
    let x = (threshold.y_f.max(1) as f64).powf(u);
    let bound = x.floor() as u64;
    assert!(
        bound <= tab.limit(),
        "chain threshold {x} beyond table limit {}",
        tab.limit()
    );
    let sieve = tab.sieve();
    let lhs = summatory_s(tab, h.ctx(), x);
    let mut rhs = 0.0;
    for n in 1..=bound {
        let v = h.value(sieve, n);
        if v != 0.0 {
            rhs += v * (x / n as f64).ln();
        }
    }
    let g = deconvolve_g(tab, h, bound);
    let applicable = h.y() == threshold.y_f && g.supported_nonnegative();
    let vacuous = sieve
        .primes()
        .take_while(|&p| p <= bound)
        .all(|p| h.prime_value(p) == 0.0);
    let tolerance = 1e-9 * (1.0 + lhs.abs().max(rhs.abs()));
    let status = if !applicable {
        ChainStatus::Inapplicable
    } else if lhs + tolerance < rhs {
        ChainStatus::Violated
    } else if vacuous {
        ChainStatus::Vacuous
    } else {
        ChainStatus::Holds
    };
    Prop2Report {
        status,
        y_f: threshold.y_f,
        witness: threshold.witness,
        u,
        x,
        lhs,
        rhs,
        supported_min_g: g.supported,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenform::{FillRule, LiftBackend, SyntheticLift};
    use crate::shimura::{halfintegral_coefficients, Character, FormInstance};
    use num_bigint::BigInt;

    fn default_table(limit: u64) -> HalfIntegralTable {
        halfintegral_coefficients(FormInstance::default_delta(), limit).unwrap()
    }

    fn default_ctx() -> ModulusContext {
        ModulusContext::new(&FormInstance::default_delta(), 100)
    }

    fn synthetic_table(lift: SyntheticLift, limit: u64) -> HalfIntegralTable {
        let inst =
            FormInstance::new(6, 4, Character::Trivial, 1, LiftBackend::Synthetic(lift)).unwrap();
        halfintegral_coefficients(inst, limit).unwrap()
    }

    #[test]
    fn band_values_default_context() {
        let ctx = default_ctx();
        let scale = ctx.log_scale();
        let h = HFunction::new(ctx, 10_000, 1.0).unwrap();
        // Modulus primes are dead no matter the band.
        for p in [2u64, 3, 5, 7, 53, 59] {
            assert_eq!(h.prime_value(p), 0.0, "p = {p}");
        }
        // 61..97 sit between the smooth bound and sqrt(10^4).
        assert!((h.prime_value(61) - (1.0 - 1.0 / scale)).abs() < 1e-15);
        assert!((h.prime_value(97) - (1.0 - 1.0 / scale)).abs() < 1e-15);
        // 101^2 > 10^4, so 101 falls in the middle band, as does 9973.
        assert!((h.prime_value(101) - (-1.0 / scale)).abs() < 1e-15);
        assert!((h.prime_value(9973) - (-1.0 / scale)).abs() < 1e-15);
        // Beyond y the strongly negative band applies.
        assert!((h.prime_value(10_007) - (-2.0 - 1.0 / scale)).abs() < 1e-15);
    }

    #[test]
    fn constructor_validation() {
        let ctx = default_ctx();
        assert!(matches!(
            HFunction::new(ctx.clone(), 0, 1.0),
            Err(HsumError::BadThreshold(0))
        ));
        assert!(matches!(
            HFunction::new(ctx.clone(), 10, 0.0),
            Err(HsumError::BadConstant(_))
        ));
        assert!(matches!(
            HFunction::new(ctx, 10, f64::NAN),
            Err(HsumError::BadConstant(_))
        ));
    }

    #[test]
    fn value_is_multiplicative_with_squarefree_support() {
        let sieve = FactorSieve::new(10_000).unwrap();
        let h = HFunction::new(default_ctx(), 10_000, 1.0).unwrap();
        assert_eq!(h.value(&sieve, 1), 1.0);
        for n in [4u64, 9, 121, 61 * 61] {
            assert_eq!(h.value(&sieve, n), 0.0, "square divisor at {n}");
        }
        assert_eq!(h.value(&sieve, 2 * 61), 0.0, "modulus prime kills 122");
        let prod = h.prime_value(61) * h.prime_value(67);
        assert!((h.value(&sieve, 61 * 67) - prod).abs() < 1e-15);
    }

    #[test]
    fn support_and_size_invariants() {
        let sieve = FactorSieve::new(5_000).unwrap();
        let ctx = default_ctx();
        let h = HFunction::new(ctx.clone(), 1_000, 1.0).unwrap();
        let cap = 2.0 + 1.0 / ctx.log_scale();
        for n in 1..=5_000u64 {
            let v = h.value(&sieve, n);
            if v != 0.0 {
                assert!(sieve.is_squarefree(n), "support must be square-free at {n}");
                assert!(
                    sieve
                        .factorize(n)
                        .iter()
                        .all(|&(p, _)| !ctx.divides_modulus(p)),
                    "support must avoid the modulus at {n}"
                );
                assert!(v.abs() <= cap.powi(sieve.omega(n) as i32) + 1e-12);
            }
        }
    }

    #[test]
    fn summatory_at_one_is_zero() {
        let tab = default_table(100);
        assert_eq!(summatory_s(&tab, &default_ctx(), 1.0), 0.0);
        assert_eq!(summatory_s(&tab, &default_ctx(), 0.5), 0.0);
    }

    #[test]
    fn summatory_matches_direct_brute_sum() {
        let tab = default_table(100);
        let ctx = default_ctx();
        let s = summatory_s(&tab, &ctx, 100.0);
        // Independent pass: trial-division square-free test and explicit
        // prime list for the coprimality condition.
        let small: Vec<u64> = vec![
            2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59,
        ];
        let mut brute = 0.0;
        'outer: for n in 1..=100u64 {
            for d in 2..=n {
                if d * d > n {
                    break;
                }
                if n % (d * d) == 0 {
                    continue 'outer;
                }
            }
            if small.iter().any(|&p| n % p == 0) {
                continue;
            }
            brute += tab.a_star(n) * (100.0 / n as f64).ln();
        }
        assert!(
            (s - brute).abs() <= 1e-12 * brute.abs().max(1.0),
            "{s} vs {brute}"
        );
    }

    #[test]
    fn summatory_is_continuous_at_new_terms() {
        let tab = default_table(100);
        let ctx = default_ctx();
        // 61 is the first admissible index past 1; its weight vanishes as
        // x crosses it.
        let below = summatory_s(&tab, &ctx, 61.0 - 1e-9);
        let above = summatory_s(&tab, &ctx, 61.0 + 1e-9);
        assert!((above - below).abs() < 1e-6);
    }

    #[test]
    fn summatory_stable_under_reversed_summation() {
        let tab = default_table(10_000);
        let ctx = default_ctx();
        let x = 10_000.0;
        let forward = summatory_s(&tab, &ctx, x);
        let sieve = tab.sieve();
        let mut terms: Vec<f64> = (1..=10_000u64)
            .filter(|&n| squarefree_coprime(sieve, &ctx, n))
            .map(|n| tab.a_star(n) * (x / n as f64).ln())
            .collect();
        terms.reverse();
        let reversed: f64 = terms.iter().sum();
        assert!((forward - reversed).abs() <= 1e-12 * forward.abs().max(1.0));
    }

    #[test]
    fn threshold_default_is_six() {
        let tab = default_table(100);
        let t = compute_y_f(&tab);
        assert_eq!(t.y_f, 6);
        assert_eq!(t.witness, Some(7));
        assert_eq!(tab.first_negative_index(100).found, t.witness);
    }

    #[test]
    fn threshold_without_witness_reaches_limit() {
        let lift = SyntheticLift::new(12, 1, FillRule::DeligneMax).unwrap();
        let tab = synthetic_table(lift, 50);
        let t = compute_y_f(&tab);
        assert_eq!(t.y_f, 50);
        assert_eq!(t.witness, None);
    }

    #[test]
    fn h_sum_below_two_is_single_term() {
        let sieve = FactorSieve::new(100).unwrap();
        let h = HFunction::new(default_ctx(), 1_000, 1.0).unwrap();
        // 1000^0.05 < 2, so only n = 1 contributes.
        let got = h_weighted_sum(&h, &sieve, 0.05);
        assert!((got - (1000f64.powf(0.05)).ln()).abs() < 1e-15);
    }

    #[test]
    fn h_sum_desk_scale_sign_structure() {
        // At y = 1000 the positive band is empty (sqrt(y) < smooth bound),
        // so the computed sum is negative even though the asymptotic
        // prediction at u = 1 is positive: the error term owns this scale.
        let sieve = FactorSieve::new(1_000).unwrap();
        let h = HFunction::new(default_ctx(), 1_000, 1.0).unwrap();
        let lhs = h_weighted_sum(&h, &sieve, 1.0);
        assert!(lhs.is_finite());
        assert!(lhs < 0.0, "lhs = {lhs}");
        let rho = crate::dickman::DickmanTable::solve(3.0, 0.005).unwrap();
        let pi = crate::friable::pi_q(default_ctx().primes()).unwrap();
        let rhs = crate::dickman::lemma42_rhs(&rho, 1.0, 1000.0, pi).unwrap();
        assert!(rhs > 0.0);
    }

    #[test]
    fn deconvolution_prime_values() {
        let tab = default_table(1_000);
        let h = HFunction::new(default_ctx(), 100, 1.0).unwrap();
        assert_eq!(g_at(&tab, &h, 1), 1.0);
        // Modulus primes see h = 0, so g is the bare coefficient there.
        assert_eq!(g_prime(&tab, &h, 2), tab.a_star(2));
        assert_eq!(g_prime(&tab, &h, 7), tab.a_star(7));
        let expect = tab.a_star(101) - h.prime_value(101);
        assert_eq!(g_prime(&tab, &h, 101), expect);
    }

    #[test]
    fn deconvolution_round_trip() {
        let tab = default_table(1_000);
        let sieve = tab.sieve();
        let ctx = default_ctx();
        let h = HFunction::new(ctx, 100, 1.0).unwrap();
        for n in 1..=1_000u64 {
            let mut conv = 0.0;
            for d in 1..=n {
                if n % d == 0 {
                    let hv = h.value(sieve, n / d);
                    if hv != 0.0 {
                        conv += g_at(&tab, &h, d) * hv;
                    }
                }
            }
            let expect = if sieve.is_squarefree(n) {
                tab.a_star(n)
            } else {
                0.0
            };
            assert!(
                (conv - expect).abs() <= 1e-10 * expect.abs().max(1.0),
                "n = {n}: {conv} vs {expect}"
            );
        }
    }

    #[test]
    fn deconvolution_exact_at_prime_powers() {
        let tab = default_table(1_000);
        let h = HFunction::new(default_ctx(), 100, 1.0).unwrap();
        for p in [61u64, 101, 127] {
            for nu in 2..=5u32 {
                let lhs = g_prime_power(&tab, &h, p, nu)
                    + g_prime_power(&tab, &h, p, nu - 1) * h.prime_value(p);
                assert_eq!(lhs, 0.0, "p = {p}, nu = {nu}");
            }
        }
    }

    #[test]
    fn deconvolution_nonnegative_on_positive_synthetic() {
        let lift = SyntheticLift::new(12, 1, FillRule::DeligneMax).unwrap();
        let tab = synthetic_table(lift, 200);
        let h = HFunction::new(default_ctx(), 100, 1.0).unwrap();
        let report = deconvolve_g(&tab, &h, 200);
        let (_, overall_min) = report.overall.unwrap();
        assert!(overall_min > 0.0, "min g = {overall_min}");
        assert!(report.supported_nonnegative());
    }

    #[test]
    fn prop1_reports_finite_ratios() {
        let tab = default_table(10_000);
        let report = prop1_ratio_report(&tab, &default_ctx(), &[100.0, 1_000.0, 10_000.0]);
        assert_eq!(report.rows.len(), 3);
        for row in &report.rows {
            assert!(row.ratio.is_finite() && row.ratio >= 0.0);
            assert!(row.envelope > 0.0);
        }
        assert_eq!(report.epsilon, PROP1_EPSILON);
    }

    #[test]
    fn prop1_near_trivial_synthetic() {
        // c(p) = p^5 at odd primes and c(2) = 0 makes A(p) = 0 everywhere,
        // so the square-free support reduces to n = 1 and S(x) = log x.
        let mut lift = SyntheticLift::new(12, 1, FillRule::Error).unwrap();
        let mut p = 2u64;
        while p <= 500 {
            if crate::arithfn::is_prime(p) {
                let v = if p == 2 {
                    BigInt::from(0)
                } else {
                    BigInt::from(p).pow(5u32)
                };
                lift.assign(p, v).unwrap();
            }
            p += 1;
        }
        let tab = synthetic_table(lift, 500);
        let ctx = default_ctx();
        let grid = [100.0, 300.0, 500.0];
        let report = prop1_ratio_report(&tab, &ctx, &grid);
        for (row, &x) in report.rows.iter().zip(&grid) {
            assert!((row.s - x.ln()).abs() < 1e-12, "S({x}) = {}", row.s);
        }
        // log x / sqrt(x) decreases, so no blowup flag.
        assert!(!report.blowup);
    }

    #[test]
    fn prop2_default_is_vacuous() {
        let tab = default_table(100);
        let h = HFunction::new(default_ctx(), 6, 1.0).unwrap();
        let report = prop2_chain_check(&tab, &h, 1.05);
        assert_eq!(report.status, ChainStatus::Vacuous);
        assert_eq!(report.y_f, 6);
        // Only n = 1 is admissible below 6^1.05, so both sides agree.
        assert!((report.lhs - report.rhs).abs() < 1e-12);
        assert!((report.lhs - report.x.ln()).abs() < 1e-12);
    }

    #[test]
    fn prop2_both_sides_vanish_as_u_shrinks() {
        let tab = default_table(100);
        let h = HFunction::new(default_ctx(), 6, 1.0).unwrap();
        let report = prop2_chain_check(&tab, &h, 1e-6);
        assert!(report.lhs.abs() < 1e-5);
        assert!(report.rhs.abs() < 1e-5);
        assert_ne!(report.status, ChainStatus::Violated);
    }

    #[test]
    fn prop2_holds_on_positive_synthetic() {
        // Strongly positive prime coefficients with one mild negative at
        // 151: the threshold lands at 150 and the chain inequality has
        // actual content on the primes in (59, 150].
        let mut lift = SyntheticLift::new(12, 1, FillRule::DeligneMax).unwrap();
        lift.assign(151, BigInt::from(151u64).pow(5u32) - 1)
            .unwrap();
        let tab = synthetic_table(lift, 400);
        let threshold = compute_y_f(&tab);
        assert_eq!(threshold.y_f, 150);
        assert_eq!(threshold.witness, Some(151));
        let ctx = ModulusContext::new(tab.instance(), 100);
        let h = HFunction::new(ctx, 150, 1.0).unwrap();
        let report = prop2_chain_check(&tab, &h, 1.05);
        assert_eq!(report.status, ChainStatus::Holds);
        assert!(report.lhs > report.rhs, "{} vs {}", report.lhs, report.rhs);
        let (_, min_g) = report.supported_min_g.unwrap();
        assert!(min_g >= 0.0);
    }

    #[test]
    fn prop2_mismatched_threshold_is_inapplicable() {
        let tab = default_table(100);
        let h = HFunction::new(default_ctx(), 50, 1.0).unwrap();
        let report = prop2_chain_check(&tab, &h, 1.0);
        assert_eq!(report.status, ChainStatus::Inapplicable);
    }

    #[test]
    fn prop2_negative_g_is_inapplicable() {
        // Extreme negative coefficient at 61 drives a*(61) to -2 - 1/sqrt(61);
        // with c small the strong band value -2 - c/L sits above it, so
        // g(61) < 0 at a supported prime.
        let mut lift = SyntheticLift::new(12, 1, FillRule::DeligneMax).unwrap();
        let cap = (BigInt::from(4) * BigInt::from(61u64).pow(11u32)).sqrt();
        lift.assign(61, -cap).unwrap();
        let tab = synthetic_table(lift, 100);
        let threshold = compute_y_f(&tab);
        assert_eq!(threshold.y_f, 60);
        let ctx = ModulusContext::new(tab.instance(), 100);
        let h = HFunction::new(ctx, 60, 0.5).unwrap();
        let report = prop2_chain_check(&tab, &h, 1.05);
        assert_eq!(report.status, ChainStatus::Inapplicable);
        let (p, v) = report.supported_min_g.unwrap();
        assert_eq!(p, 61);
        assert!(v < 0.0, "g(61) = {v}");
    }
}
