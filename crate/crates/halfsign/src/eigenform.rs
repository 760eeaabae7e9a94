//! Integral-weight eigenvalue tables.
//!
//! The built-in backend is the weight-12 level-1 discriminant form, whose
//! coefficients are produced from the eta-product expansion
//! `q * prod (1 - q^n)^24`. The expansion is computed purely as a q-series:
//! the cube of the pentagonal-number series is collapsed with the
//! triangular-number identity `prod (1 - q^n)^3 = sum (-1)^j (2j+1)
//! q^{j(j+1)/2}`, and the 24th power is assembled as eight cubes. Nothing on
//! this path uses Hecke theory, so recurrence checks downstream are
//! genuinely independent.
//!
//! Synthetic backends take eigenvalues at primes and extend them through the
//! three-term recurrence, which lets tests pin down degenerate behaviour
//! (vanishing at a prime, forced signs, boundary eigenvalues) that the
//! built-in form never exhibits.

use crate::arithfn::{self, ArithError, CoefficientTable, FactorSieve};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Largest supported eigenvalue table limit.
pub const MAX_EIGEN_LIMIT: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("limit {limit} outside supported range 1..={max}")]
    Capacity { limit: u64, max: u64 },
    #[error("series coefficient exceeded the 128-bit working range")]
    Overflow,
    #[error("recurrence fails at p = {p}, exponent {nu}")]
    Recurrence { p: u64, nu: u32 },
    #[error("eigenvalue at p = {p} violates the Deligne bound")]
    DeligneViolation { p: u64 },
    #[error("synthetic lift: {0}")]
    Synthetic(String),
    #[error("synthetic lift parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Value at an unassigned prime of a synthetic lift.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FillRule {
    /// Unassigned primes are an error.
    Error,
    /// `c(p) = 0`: the local factor degenerates.
    Zero,
    /// `c(p) = 1`.
    One,
    /// `c(p) = p^{k-1} + 1`: always admissible, always positive.
    UnitPositive,
    /// `c(p) = floor(2 p^{(2k-1)/2})`: the largest admissible integer.
    DeligneMax,
}

impl FillRule {
    fn token(self) -> &'static str {
        match self {
            FillRule::Error => "error",
            FillRule::Zero => "zero",
            FillRule::One => "one",
            FillRule::UnitPositive => "unit-positive",
            FillRule::DeligneMax => "deligne-max",
        }
    }

    fn from_token(s: &str) -> Option<FillRule> {
        Some(match s {
            "error" => FillRule::Error,
            "zero" => FillRule::Zero,
            "one" => FillRule::One,
            "unit-positive" => FillRule::UnitPositive,
            "deligne-max" => FillRule::DeligneMax,
            _ => return None,
        })
    }
}

/// Eigenvalues supplied at primes, extended everywhere by the recurrence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntheticLift {
    two_k: u32,
    level: u64,
    fill: FillRule,
    assigned: BTreeMap<u64, BigInt>,
}

impl SyntheticLift {
    /// `two_k` is the integral weight, even and at least 2.
    pub fn new(two_k: u32, level: u64, fill: FillRule) -> Result<Self, EigenError> {
        if two_k < 2 || two_k % 2 != 0 {
            return Err(EigenError::Synthetic(format!(
                "weight {two_k} must be even and at least 2"
            )));
        }
        if level == 0 {
            return Err(EigenError::Synthetic("level must be positive".into()));
        }
        Ok(SyntheticLift {
            two_k,
            level,
            fill,
            assigned: BTreeMap::new(),
        })
    }

    pub fn assign(&mut self, p: u64, c: BigInt) -> Result<(), EigenError> {
        if !arithfn::is_prime(p) {
            return Err(EigenError::Synthetic(format!(
                "eigenvalues are assigned at primes, got {p}"
            )));
        }
        self.assigned.insert(p, c);
        Ok(())
    }

    pub fn weight(&self) -> u32 {
        self.two_k
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    fn eigenvalue_at(&self, p: u64) -> Result<BigInt, EigenError> {
        if let Some(c) = self.assigned.get(&p) {
            return Ok(c.clone());
        }
        let k = self.two_k / 2;
        Ok(match self.fill {
            FillRule::Error => {
                return Err(EigenError::Synthetic(format!(
                    "no eigenvalue assigned at prime {p}"
                )))
            }
            FillRule::Zero => BigInt::zero(),
            FillRule::One => BigInt::one(),
            FillRule::UnitPositive => BigInt::from(p).pow(k - 1) + 1,
            FillRule::DeligneMax => (BigInt::from(4) * BigInt::from(p).pow(self.two_k - 1)).sqrt(),
        })
    }

    /// Parses the line format written by [`Display`]: `weight`, `level`,
    /// `fill` directives followed by `p c_p` assignments. Blank lines and
    /// `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, EigenError> {
        let mut weight: Option<u32> = None;
        let mut level = 1u64;
        let mut fill = FillRule::Error;
        let mut assigned: Vec<(u64, BigInt)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, rest) =
                line.split_once(char::is_whitespace)
                    .ok_or_else(|| EigenError::Parse {
                        line: lineno,
                        reason: format!("expected `key value`, got `{line}`"),
                    })?;
            let rest = rest.trim();
            match head {
                "weight" => {
                    weight = Some(rest.parse().map_err(|_| EigenError::Parse {
                        line: lineno,
                        reason: format!("bad weight `{rest}`"),
                    })?)
                }
                "level" => {
                    level = rest.parse().map_err(|_| EigenError::Parse {
                        line: lineno,
                        reason: format!("bad level `{rest}`"),
                    })?
                }
                "fill" => {
                    fill = FillRule::from_token(rest).ok_or_else(|| EigenError::Parse {
                        line: lineno,
                        reason: format!("unknown fill rule `{rest}`"),
                    })?
                }
                p_str => {
                    let p: u64 = p_str.parse().map_err(|_| EigenError::Parse {
                        line: lineno,
                        reason: format!("unknown directive `{p_str}`"),
                    })?;
                    let c: BigInt = rest.parse().map_err(|_| EigenError::Parse {
                        line: lineno,
                        reason: format!("bad eigenvalue `{rest}`"),
                    })?;
                    assigned.push((p, c));
                }
            }
        }
        let two_k = weight.ok_or_else(|| EigenError::Parse {
            line: 1,
            reason: "missing `weight` directive".into(),
        })?;
        let mut lift = SyntheticLift::new(two_k, level, fill)?;
        for (p, c) in assigned {
            lift.assign(p, c)?;
        }
        Ok(lift)
    }
}

impl fmt::Display for SyntheticLift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "weight {}", self.two_k)?;
        writeln!(f, "level {}", self.level)?;
        writeln!(f, "fill {}", self.fill.token())?;
        for (p, c) in &self.assigned {
            writeln!(f, "{p} {c}")?;
        }
        Ok(())
    }
}

/// Source of the integral-weight eigenvalues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LiftBackend {
    /// Weight 12, level 1, coefficients from the eta product.
    BuiltinDelta,
    Synthetic(SyntheticLift),
}

impl LiftBackend {
    pub fn weight(&self) -> u32 {
        match self {
            LiftBackend::BuiltinDelta => 12,
            LiftBackend::Synthetic(s) => s.two_k,
        }
    }

    pub fn level(&self) -> u64 {
        match self {
            LiftBackend::BuiltinDelta => 1,
            LiftBackend::Synthetic(s) => s.level,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            LiftBackend::BuiltinDelta => "delta",
            LiftBackend::Synthetic(_) => "synthetic",
        }
    }
}

/// Exact eigenvalue table `c(n)` for `n = 1..=limit`, weight `2k`.
pub struct EigenvalueTable {
    two_k: u32,
    level: u64,
    c: CoefficientTable,
}

/// Pentagonal-number series `prod (1 - q^n)` as `(exponent, coefficient)`.
#[cfg(test)]
fn pentagonal_terms(deg: usize) -> Vec<(usize, i64)> {
    let mut t = vec![(0usize, 1i64)];
    let mut j = 1i64;
    loop {
        let e1 = (j * (3 * j - 1) / 2) as usize;
        let e2 = (j * (3 * j + 1) / 2) as usize;
        let sign = if j % 2 == 1 { -1 } else { 1 };
        let mut any = false;
        if e1 <= deg {
            t.push((e1, sign));
            any = true;
        }
        if e2 <= deg {
            t.push((e2, sign));
            any = true;
        }
        if !any {
            break;
        }
        j += 1;
    }
    t.sort_unstable();
    t
}

/// Triangular-number series `prod (1 - q^n)^3 = sum (-1)^j (2j+1) q^{j(j+1)/2}`.
fn triangular_cube_terms(deg: usize) -> Vec<(usize, i64)> {
    let mut t = Vec::new();
    let mut j = 0i64;
    loop {
        let e = (j * (j + 1) / 2) as usize;
        if e > deg {
            break;
        }
        let c = if j % 2 == 0 { 2 * j + 1 } else { -(2 * j + 1) };
        t.push((e, c));
        j += 1;
    }
    t
}

/// Multiplies a dense series by a sparse one, truncating at `deg`.
/// All arithmetic is overflow-checked.
fn mul_sparse(acc: &[i128], terms: &[(usize, i64)], deg: usize) -> Result<Vec<i128>, EigenError> {
    let mut out = vec![0i128; deg + 1];
    for &(e, c) in terms {
        let c = c as i128;
        for (i, &v) in acc.iter().take(deg - e + 1).enumerate() {
            if v != 0 {
                let prod = v.checked_mul(c).ok_or(EigenError::Overflow)?;
                let cell = &mut out[i + e];
                *cell = cell.checked_add(prod).ok_or(EigenError::Overflow)?;
            }
        }
    }
    Ok(out)
}

fn dense_from_terms(terms: &[(usize, i64)], deg: usize) -> Vec<i128> {
    let mut out = vec![0i128; deg + 1];
    for &(e, c) in terms {
        out[e] += c as i128;
    }
    out
}

/// `prod (1 - q^n)^24` to degree `deg`, as eight triangular cubes.
fn eta24_by_cubes(deg: usize) -> Result<Vec<i128>, EigenError> {
    let terms = triangular_cube_terms(deg);
    let mut acc = dense_from_terms(&terms, deg);
    for _ in 1..8 {
        acc = mul_sparse(&acc, &terms, deg)?;
    }
    Ok(acc)
}

/// Same product assembled from 24 pentagonal factors; used to cross-check
/// the cube grouping.
#[cfg(test)]
fn eta24_by_pentagonal(deg: usize) -> Result<Vec<i128>, EigenError> {
    let terms = pentagonal_terms(deg);
    let mut acc = dense_from_terms(&terms, deg);
    for _ in 1..24 {
        acc = mul_sparse(&acc, &terms, deg)?;
    }
    Ok(acc)
}

/// Coefficients of the weight-12 discriminant form for `n = 1..=limit`.
pub fn delta_coefficients(limit: u64) -> Result<EigenvalueTable, EigenError> {
    if limit < 1 || limit > MAX_EIGEN_LIMIT {
        return Err(EigenError::Capacity {
            limit,
            max: MAX_EIGEN_LIMIT,
        });
    }
    let series = eta24_by_cubes(limit as usize - 1)?;
    let values = series.into_iter().map(BigInt::from).collect();
    Ok(EigenvalueTable {
        two_k: 12,
        level: 1,
        c: CoefficientTable::from_values("tau", values),
    })
}

/// Extends `c` from primes to `n = 1..=limit` through the recurrence.
pub fn synthetic_coefficients(
    lift: &SyntheticLift,
    limit: u64,
) -> Result<EigenvalueTable, EigenError> {
    if limit < 1 || limit > MAX_EIGEN_LIMIT {
        return Err(EigenError::Capacity {
            limit,
            max: MAX_EIGEN_LIMIT,
        });
    }
    let sieve = FactorSieve::new(limit.max(2))?;
    let mut failed: Option<EigenError> = None;
    let table =
        arithfn::extend_multiplicative(&sieve, limit, "c", |p, e| match lift.eigenvalue_at(p) {
            Ok(cp) => Some(prime_power_value(&cp, p, e, lift.two_k, lift.level)),
            Err(err) => {
                failed = Some(err);
                None
            }
        });
    match table {
        Ok(c) => Ok(EigenvalueTable {
            two_k: lift.two_k,
            level: lift.level,
            c,
        }),
        Err(e) => Err(failed.unwrap_or(EigenError::Arith(e))),
    }
}

/// Builds the eigenvalue table for a backend.
pub fn eigenvalue_table(backend: &LiftBackend, limit: u64) -> Result<EigenvalueTable, EigenError> {
    match backend {
        LiftBackend::BuiltinDelta => delta_coefficients(limit),
        LiftBackend::Synthetic(s) => synthetic_coefficients(s, limit),
    }
}

/// `c(p^nu)` from `c(p)`:
/// `c(p^{nu+1}) = c(p) c(p^nu) - p^{2k-1} c(p^{nu-1})` away from the level,
/// and `c(p^{nu+1}) = c(p) c(p^nu)` at primes dividing it.
fn prime_power_value(c_p: &BigInt, p: u64, nu: u32, two_k: u32, level: u64) -> BigInt {
    if nu == 0 {
        return BigInt::one();
    }
    let weight_pow = if level % p == 0 {
        None
    } else {
        Some(BigInt::from(p).pow(two_k - 1))
    };
    let mut prev = BigInt::one();
    let mut cur = c_p.clone();
    for _ in 1..nu {
        let mut next = c_p * &cur;
        if let Some(w) = &weight_pow {
            next -= w * &prev;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// Sato-Tate angle of one eigenvalue: `lambda = c(p) / p^{(2k-1)/2}` and
/// `theta = arccos(lambda / 2)`.
#[derive(Clone, Copy, Debug)]
pub struct SatoTateAngle {
    pub p: u64,
    pub lambda: f64,
    pub theta: f64,
}

impl EigenvalueTable {
    pub fn limit(&self) -> u64 {
        self.c.limit()
    }

    pub fn weight(&self) -> u32 {
        self.two_k
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn values(&self) -> &CoefficientTable {
        &self.c
    }

    /// Exact eigenvalue `c(n)`; requires `1 <= n <= limit`.
    pub fn c(&self, n: u64) -> &BigInt {
        self.c.get(n)
    }

    /// Normalized eigenvalue `c(n) / n^{(2k-1)/2}` as a float.
    pub fn lambda(&self, n: u64) -> f64 {
        big_to_f64(self.c(n)) / (n as f64).powf((self.two_k as f64 - 1.0) / 2.0)
    }

    /// `c(p^nu)` computed locally from `c(p)`, for any `nu`.
    pub fn prime_power(&self, p: u64, nu: u32) -> BigInt {
        prime_power_value(self.c(p), p, nu, self.two_k, self.level)
    }

    /// Checks the three-term recurrence at every prime power within the
    /// table. Returns the number of identities checked.
    pub fn verify_hecke_recurrence(&self) -> Result<u64, EigenError> {
        let limit = self.limit();
        if limit < 4 {
            return Ok(0);
        }
        let sieve = FactorSieve::new(limit)?;
        let mut checked = 0u64;
        for p in sieve.primes() {
            let weight_pow = if self.level % p == 0 {
                None
            } else {
                Some(BigInt::from(p).pow(self.two_k - 1))
            };
            let mut nu = 1u32;
            let mut pw = p; // p^nu
            while let Some(next_pw) = pw.checked_mul(p).filter(|&v| v <= limit) {
                let mut expect = self.c(p) * self.c(pw);
                if let Some(w) = &weight_pow {
                    expect -= w * self.c(pw / p);
                }
                if self.c(next_pw) != &expect {
                    return Err(EigenError::Recurrence { p, nu });
                }
                checked += 1;
                nu += 1;
                pw = next_pw;
            }
        }
        Ok(checked)
    }

    /// True iff `c(p)^2 <= 4 p^{2k-1}` (exactly) for all primes `p <= p_bound`
    /// away from the level.
    pub fn deligne_check(&self, p_bound: u64) -> Result<bool, EigenError> {
        let p_bound = p_bound.min(self.limit());
        if p_bound < 2 {
            return Ok(true);
        }
        let sieve = FactorSieve::new(p_bound)?;
        for p in sieve.primes() {
            if self.level % p == 0 {
                continue;
            }
            let c = self.c(p);
            if c * c > BigInt::from(4) * BigInt::from(p).pow(self.two_k - 1) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Angles for all primes `p <= p_bound` away from the level. Errors on
    /// the first Deligne violation: angles of inadmissible eigenvalues are
    /// undefined.
    pub fn sato_tate_angles(&self, p_bound: u64) -> Result<Vec<SatoTateAngle>, EigenError> {
        let p_bound = p_bound.min(self.limit());
        if p_bound < 2 {
            return Ok(Vec::new());
        }
        let sieve = FactorSieve::new(p_bound)?;
        let mut out = Vec::new();
        for p in sieve.primes() {
            if self.level % p == 0 {
                continue;
            }
            let c = self.c(p);
            if c * c > BigInt::from(4) * BigInt::from(p).pow(self.two_k - 1) {
                return Err(EigenError::DeligneViolation { p });
            }
            let lambda = self.lambda(p);
            let theta = (lambda / 2.0).clamp(-1.0, 1.0).acos();
            out.push(SatoTateAngle { p, lambda, theta });
        }
        Ok(out)
    }
}

/// Lossy conversion used only in report layers; saturates on overflow.
pub(crate) fn big_to_f64(v: &BigInt) -> f64 {
    v.to_f64().unwrap_or_else(|| {
        if v.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct expansion of `prod (1 - q^n)^24` by repeated polynomial
    /// multiplication, entirely in BigInt. Independent of the sparse-series
    /// path above.
    fn naive_tau(limit: usize) -> Vec<BigInt> {
        let deg = limit - 1;
        let mut poly = vec![BigInt::zero(); deg + 1];
        poly[0] = BigInt::one();
        for m in 1..=deg {
            for _ in 0..24 {
                for i in (0..=deg - m).rev() {
                    let sub = poly[i].clone();
                    poly[i + m] -= sub;
                }
            }
        }
        poly
    }

    #[test]
    fn delta_matches_naive_expansion() {
        let limit = 80u64;
        let table = delta_coefficients(limit).unwrap();
        let naive = naive_tau(limit as usize);
        for n in 1..=limit {
            assert_eq!(table.c(n), &naive[n as usize - 1], "tau({n})");
        }
    }

    #[test]
    fn delta_known_values() {
        let t = delta_coefficients(10).unwrap();
        let expect: [i64; 10] = [
            1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920,
        ];
        for (i, v) in expect.iter().enumerate() {
            assert_eq!(t.c(i as u64 + 1), &BigInt::from(*v), "tau({})", i + 1);
        }
    }

    #[test]
    fn cube_grouping_matches_pentagonal_product() {
        let deg = 3000usize;
        assert_eq!(
            eta24_by_cubes(deg).unwrap(),
            eta24_by_pentagonal(deg).unwrap()
        );
    }

    #[test]
    fn delta_is_multiplicative() {
        let t = delta_coefficients(2000).unwrap();
        let sieve = FactorSieve::new(2000).unwrap();
        assert!(t.values().verify_multiplicative(&sieve).unwrap() > 1000);
    }

    #[test]
    fn delta_recurrence_holds() {
        let t = delta_coefficients(3000).unwrap();
        let checked = t.verify_hecke_recurrence().unwrap();
        // 2 alone contributes 10 identities (2^2 .. 2^11).
        assert!(checked >= 10, "checked = {checked}");
    }

    #[test]
    fn delta_divisor_bound_exact() {
        // |tau(n)| <= d(n) n^{11/2}, squared to stay in integers.
        let limit = 10_000u64;
        let t = delta_coefficients(limit).unwrap();
        let sieve = FactorSieve::new(limit).unwrap();
        for n in 1..=limit {
            let d: u64 = sieve
                .factorize(n)
                .iter()
                .map(|&(_, e)| e as u64 + 1)
                .product();
            let lhs = t.c(n) * t.c(n);
            let rhs = BigInt::from(d * d) * BigInt::from(n).pow(11);
            assert!(lhs <= rhs, "divisor bound fails at n = {n}");
        }
    }

    #[test]
    fn delta_capacity_errors() {
        assert!(matches!(
            delta_coefficients(0),
            Err(EigenError::Capacity { .. })
        ));
        assert!(matches!(
            delta_coefficients(MAX_EIGEN_LIMIT + 1),
            Err(EigenError::Capacity { .. })
        ));
        assert_eq!(delta_coefficients(1).unwrap().c(1), &BigInt::one());
    }

    #[test]
    fn prime_power_helper_matches_table() {
        let t = delta_coefficients(4100).unwrap();
        for (p, max_nu) in [(2u64, 11u32), (3, 7), (5, 5), (7, 4), (61, 1)] {
            for nu in 0..=max_nu {
                let pw = p.pow(nu);
                assert_eq!(&t.prime_power(p, nu), t.c(pw), "c({p}^{nu})");
            }
        }
    }

    #[test]
    fn sato_tate_angles_delta() {
        let t = delta_coefficients(100).unwrap();
        let angles = t.sato_tate_angles(100).unwrap();
        assert_eq!(angles.len(), 25);
        for a in &angles {
            assert!(a.theta >= 0.0 && a.theta <= std::f64::consts::PI);
            // Definitional consistency.
            assert!(
                (a.theta.cos() * 2.0 - a.lambda).abs() < 1e-12,
                "p = {}",
                a.p
            );
        }
        let a2 = angles[0];
        assert_eq!(a2.p, 2);
        assert!((a2.lambda - -24.0 / 2f64.powf(5.5)).abs() < 1e-14);
        assert!(a2.theta > std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn sato_tate_right_angle_at_vanishing_eigenvalue() {
        let mut lift = SyntheticLift::new(12, 1, FillRule::One).unwrap();
        lift.assign(2, BigInt::zero()).unwrap();
        let t = synthetic_coefficients(&lift, 50).unwrap();
        let angles = t.sato_tate_angles(2).unwrap();
        assert_eq!(angles.len(), 1);
        assert!((angles[0].theta - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn chebyshev_values_track_angles() {
        // c(2^nu) / 2^{5.5 nu} = sin((nu+1) theta) / sin(theta) for delta.
        let t = delta_coefficients(2048).unwrap();
        let theta = t.sato_tate_angles(2).unwrap()[0].theta;
        for nu in 1..=11u32 {
            let lhs = t.lambda(2u64.pow(nu));
            let rhs = ((nu as f64 + 1.0) * theta).sin() / theta.sin();
            assert!((lhs - rhs).abs() < 1e-9, "nu = {nu}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn deligne_check_accepts_delta_rejects_boundary() {
        let t = delta_coefficients(10_000).unwrap();
        assert!(t.deligne_check(10_000).unwrap());

        // Smallest integer above the boundary 2 p^{11/2} at p = 2 is 91.
        let mut lift = SyntheticLift::new(12, 1, FillRule::One).unwrap();
        lift.assign(2, BigInt::from(91)).unwrap();
        let bad = synthetic_coefficients(&lift, 10).unwrap();
        assert!(!bad.deligne_check(10).unwrap());
        assert!(matches!(
            bad.sato_tate_angles(10),
            Err(EigenError::DeligneViolation { p: 2 })
        ));
    }

    #[test]
    fn boundary_eigenvalue_is_never_admissible() {
        // 4 p^{2k-1} is never a perfect square, so no integer table attains
        // the boundary lambda = 2 exactly.
        for p in [2u64, 3, 5, 7, 11] {
            let four_pw = BigInt::from(4) * BigInt::from(p).pow(11);
            let root = four_pw.sqrt();
            assert!(&root * &root < four_pw, "p = {p}");
        }
    }

    #[test]
    fn deligne_max_fill_is_admissible_and_tight() {
        let lift = SyntheticLift::new(12, 1, FillRule::DeligneMax).unwrap();
        let t = synthetic_coefficients(&lift, 100).unwrap();
        assert_eq!(t.c(2), &BigInt::from(90)); // floor(2 * 2^5.5) = 90
        assert!(t.deligne_check(100).unwrap());
        // One more than the fill violates the bound.
        let mut bumped = SyntheticLift::new(12, 1, FillRule::DeligneMax).unwrap();
        bumped.assign(3, BigInt::from(842)).unwrap(); // floor(2 * 3^5.5) + 1
        let bad = synthetic_coefficients(&bumped, 100).unwrap();
        assert!(!bad.deligne_check(100).unwrap());
    }

    #[test]
    fn synthetic_level_prime_truncates_recurrence() {
        // At p | level the weight term drops: c(2^nu) = c(2)^nu, so a
        // vanishing eigenvalue wipes out the whole 2-power column.
        let mut lift = SyntheticLift::new(12, 2, FillRule::UnitPositive).unwrap();
        lift.assign(2, BigInt::zero()).unwrap();
        let t = synthetic_coefficients(&lift, 64).unwrap();
        for pw in [2u64, 4, 8, 16, 32, 64] {
            assert!(t.c(pw).is_zero(), "c({pw})");
        }
        assert!(t.verify_hecke_recurrence().unwrap() > 0);
        assert!(!t.c(3).is_zero());
    }

    #[test]
    fn synthetic_fill_rules() {
        let one =
            synthetic_coefficients(&SyntheticLift::new(12, 1, FillRule::One).unwrap(), 20).unwrap();
        assert_eq!(one.c(2), &BigInt::one());
        assert_eq!(one.c(4), &BigInt::from(1 - 2048)); // c(2)^2 - 2^11

        let unit = synthetic_coefficients(
            &SyntheticLift::new(12, 1, FillRule::UnitPositive).unwrap(),
            20,
        )
        .unwrap();
        assert_eq!(unit.c(2), &BigInt::from(33)); // 2^5 + 1
        assert_eq!(unit.c(3), &BigInt::from(244)); // 3^5 + 1

        let err = synthetic_coefficients(&SyntheticLift::new(12, 1, FillRule::Error).unwrap(), 20);
        assert!(matches!(err, Err(EigenError::Synthetic(_))));
    }

    #[test]
    fn synthetic_recurrence_verified_end_to_end() {
        let mut lift = SyntheticLift::new(16, 6, FillRule::UnitPositive).unwrap();
        lift.assign(2, BigInt::from(7)).unwrap();
        lift.assign(5, BigInt::from(-3)).unwrap();
        let t = synthetic_coefficients(&lift, 2000).unwrap();
        assert!(t.verify_hecke_recurrence().unwrap() > 0);
        let sieve = FactorSieve::new(2000).unwrap();
        assert!(t.values().verify_multiplicative(&sieve).unwrap() > 0);
    }

    #[test]
    fn synthetic_parse_round_trip() {
        let mut lift = SyntheticLift::new(12, 4, FillRule::Zero).unwrap();
        lift.assign(3, BigInt::from(-100)).unwrap();
        lift.assign(7, BigInt::from(12345678901234567890i128))
            .unwrap();
        let text = lift.to_string();
        assert_eq!(SyntheticLift::parse(&text).unwrap(), lift);
    }

    #[test]
    fn synthetic_parse_errors() {
        assert!(matches!(
            SyntheticLift::parse("level 2\n2 5\n"),
            Err(EigenError::Parse { .. })
        ));
        assert!(matches!(
            SyntheticLift::parse("weight 12\nfill sometimes\n"),
            Err(EigenError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            SyntheticLift::parse("weight 12\n4 10\n"),
            Err(EigenError::Synthetic(_))
        ));
        assert!(matches!(
            SyntheticLift::parse("weight 11\n"),
            Err(EigenError::Synthetic(_))
        ));
    }
}
