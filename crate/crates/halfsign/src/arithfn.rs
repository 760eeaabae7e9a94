//! Factor sieves, exact coefficient tables, and the Dirichlet algebra used
//! by every pipeline stage.
//!
//! Tables hold arbitrary-precision integers indexed by `n = 1..=limit`.
//! Convolution and inversion iterate over divisor pairs directly; at the
//! table sizes this crate targets (`<= 10^6` entries) that is faster and
//! simpler than transform-based multiplication and keeps every intermediate
//! value exact.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead, Write};
use thiserror::Error;

/// Largest supported sieve and table limit.
pub const MAX_SIEVE_LIMIT: u64 = 100_000_000;

#[derive(Debug, Error)]
pub enum ArithError {
    #[error("limit {limit} outside supported range 1..={max}")]
    Capacity { limit: u64, max: u64 },
    #[error("table limits differ: {left} vs {right}")]
    ShapeMismatch { left: u64, right: u64 },
    #[error("no value supplied for prime power {p}^{nu}")]
    MissingPrimePower { p: u64, nu: u32 },
    #[error("table `{label}` is not multiplicative at coprime pair ({m}, {n})")]
    NotMultiplicative { label: String, m: u64, n: u64 },
    #[error("table `{label}` has f(1) = {value}, expected 1")]
    BadUnit { label: String, value: BigInt },
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Smallest-prime-factor sieve over `2..=limit`.
///
/// Factorisation of any `n <= limit` walks the stored factors, so it costs
/// `O(log n)` per call with no division loop.
pub struct FactorSieve {
    limit: u64,
    spf: Vec<u32>,
}

impl FactorSieve {
    pub fn new(limit: u64) -> Result<Self, ArithError> {
        if limit < 2 || limit > MAX_SIEVE_LIMIT {
            return Err(ArithError::Capacity {
                limit,
                max: MAX_SIEVE_LIMIT,
            });
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut i = 2usize;
        while i <= n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                let mut j = i * i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
            i += 1;
        }
        Ok(FactorSieve { limit, spf })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Smallest prime factor of `n`; requires `2 <= n <= limit`.
    pub fn smallest_prime_factor(&self, n: u64) -> u64 {
        assert!(
            2 <= n && n <= self.limit,
            "smallest_prime_factor({n}) outside sieve range 2..={}",
            self.limit
        );
        self.spf[n as usize] as u64
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.limit && self.spf[n as usize] as u64 == n
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.spf
            .iter()
            .enumerate()
            .skip(2)
            .filter(|&(i, &p)| p as usize == i)
            .map(|(i, _)| i as u64)
    }

    /// Prime factorisation in ascending prime order; `factorize(1)` is empty.
    pub fn factorize(&self, n: u64) -> Vec<(u64, u32)> {
        assert!(
            1 <= n && n <= self.limit,
            "factorize({n}) outside sieve range 1..={}",
            self.limit
        );
        let mut out = Vec::new();
        let mut m = n as usize;
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut e = 0u32;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        out
    }

    pub fn is_squarefree(&self, n: u64) -> bool {
        assert!(1 <= n && n <= self.limit);
        let mut m = n as usize;
        while m > 1 {
            let p = self.spf[m] as usize;
            m /= p;
            if m % p == 0 {
                return false;
            }
        }
        true
    }

    /// Moebius function: `0` on non-square-free `n`, otherwise `(-1)^omega(n)`.
    pub fn moebius(&self, n: u64) -> i8 {
        assert!(1 <= n && n <= self.limit);
        let mut m = n as usize;
        let mut sign = 1i8;
        while m > 1 {
            let p = self.spf[m] as usize;
            m /= p;
            if m % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        sign
    }

    /// Largest prime factor, with the convention `P(1) = 1`.
    pub fn largest_prime_factor(&self, n: u64) -> u64 {
        assert!(1 <= n && n <= self.limit);
        let mut m = n as usize;
        let mut largest = 1u64;
        while m > 1 {
            let p = self.spf[m] as usize;
            largest = p as u64;
            while m % p == 0 {
                m /= p;
            }
        }
        largest
    }

    pub fn omega(&self, n: u64) -> u32 {
        self.factorize(n).len() as u32
    }
}

/// Deterministic Miller-Rabin primality test for arbitrary `u64`.
///
/// The witness set covers the full 64-bit range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let s = d.trailing_zeros();
    d >>= s;
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        b %= n;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Kronecker symbol `(m / d)` for `d >= 1`, extended multiplicatively over
/// the factorisation of `d` with the standard convention at `2`.
///
/// `d = 0` is handled for totality: `(m / 0) = 1` iff `m = +-1`.
pub fn kronecker(m: i64, d: u64) -> i32 {
    if d == 0 {
        return if m == 1 || m == -1 { 1 } else { 0 };
    }
    let mut result = 1i32;
    let mut n = d;
    let twos = n.trailing_zeros();
    if twos > 0 {
        if m % 2 == 0 {
            return 0;
        }
        n >>= twos;
        if twos % 2 == 1 {
            let r = m.rem_euclid(8);
            if r == 3 || r == 5 {
                result = -result;
            }
        }
    }
    // Jacobi symbol over the remaining odd part.
    let mut a = (m as i128).rem_euclid(n as i128) as u64;
    while a != 0 {
        let z = a.trailing_zeros();
        a >>= z;
        if z % 2 == 1 {
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Exact integer sequence indexed by `n = 1..=limit`.
#[derive(Clone, PartialEq, Eq)]
pub struct CoefficientTable {
    label: String,
    // values[0] is a permanent zero so that values[n] addresses index n.
    values: Vec<BigInt>,
}

impl fmt::Debug for CoefficientTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CoefficientTable({}, limit {})",
            self.label,
            self.limit()
        )
    }
}

impl CoefficientTable {
    /// Wraps values for `n = 1..=values.len()`.
    pub fn from_values(label: impl Into<String>, values: Vec<BigInt>) -> Self {
        let mut v = Vec::with_capacity(values.len() + 1);
        v.push(BigInt::zero());
        v.extend(values);
        CoefficientTable {
            label: label.into(),
            values: v,
        }
    }

    pub fn from_fn(label: impl Into<String>, limit: u64, f: impl FnMut(u64) -> BigInt) -> Self {
        Self::from_values(label, (1..=limit).map(f).collect())
    }

    pub fn ones(label: impl Into<String>, limit: u64) -> Self {
        Self::from_fn(label, limit, |_| BigInt::one())
    }

    /// Convolution identity: `1` at `n = 1`, zero elsewhere.
    pub fn unit(label: impl Into<String>, limit: u64) -> Self {
        Self::from_fn(label, limit, |n| {
            if n == 1 {
                BigInt::one()
            } else {
                BigInt::zero()
            }
        })
    }

    pub fn moebius(label: impl Into<String>, sieve: &FactorSieve, limit: u64) -> Self {
        assert!(limit <= sieve.limit());
        Self::from_fn(label, limit, |n| BigInt::from(sieve.moebius(n)))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn limit(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    /// Value at `n`; requires `1 <= n <= limit`.
    pub fn get(&self, n: u64) -> &BigInt {
        assert!(
            1 <= n && n <= self.limit(),
            "index {n} outside table `{}` range 1..={}",
            self.label,
            self.limit()
        );
        &self.values[n as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &BigInt)> {
        self.values
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, v)| (n as u64, v))
    }

    /// Dirichlet convolution `(self * other)(n) = sum over d | n of
    /// self(d) * other(n/d)`, on the common limit.
    pub fn dirichlet_convolve(
        &self,
        other: &CoefficientTable,
        label: impl Into<String>,
    ) -> Result<CoefficientTable, ArithError> {
        let x = self.limit();
        if x != other.limit() {
            return Err(ArithError::ShapeMismatch {
                left: x,
                right: other.limit(),
            });
        }
        let xu = x as usize;
        let mut out = vec![BigInt::zero(); xu + 1];
        for d in 1..=xu {
            let a = &self.values[d];
            if a.is_zero() {
                continue;
            }
            for m in 1..=xu / d {
                let b = &other.values[m];
                if !b.is_zero() {
                    out[d * m] += a * b;
                }
            }
        }
        out.remove(0);
        Ok(CoefficientTable::from_values(label, out))
    }

    /// Inverts `c = 1 * a`: recovers `a(n) = sum over d | n of
    /// moebius(d) * c(n/d)`.
    pub fn moebius_invert(&self, label: impl Into<String>) -> Result<CoefficientTable, ArithError> {
        let limit = self.limit().max(2);
        let sieve = FactorSieve::new(limit)?;
        let mu = CoefficientTable::moebius("mu", &sieve, self.limit());
        mu.dirichlet_convolve(self, label)
    }

    /// Checks `f(1) = 1` and `f(mn) = f(m) f(n)` for every coprime pair with
    /// `mn <= limit`. Returns the number of pairs checked.
    pub fn verify_multiplicative(&self, sieve: &FactorSieve) -> Result<u64, ArithError> {
        assert!(self.limit() <= sieve.limit());
        if !self.values[1].is_one() {
            return Err(ArithError::BadUnit {
                label: self.label.clone(),
                value: self.values[1].clone(),
            });
        }
        let x = self.limit();
        let mut checked = 0u64;
        for m in 2..=x {
            for n in 2..=x / m {
                if num_integer::gcd(m, n) != 1 {
                    continue;
                }
                let prod = &self.values[m as usize] * &self.values[n as usize];
                if prod != self.values[(m * n) as usize] {
                    return Err(ArithError::NotMultiplicative {
                        label: self.label.clone(),
                        m,
                        n,
                    });
                }
                checked += 1;
            }
        }
        Ok(checked)
    }

    /// Writes `# label limit` followed by one `n<TAB>value` line per entry.
    pub fn write_tsv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "# {} {}", self.label, self.limit())?;
        for (n, v) in self.iter() {
            writeln!(w, "{n}\t{v}")?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(r: R) -> Result<CoefficientTable, ArithError> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| ArithError::Parse {
                line: 1,
                reason: "empty input".into(),
            })?
            .map_err(ArithError::Io)?;
        let body = header.strip_prefix("# ").ok_or_else(|| ArithError::Parse {
            line: 1,
            reason: "missing `# label limit` header".into(),
        })?;
        let (label, limit_str) = body.rsplit_once(' ').ok_or_else(|| ArithError::Parse {
            line: 1,
            reason: "header needs a label and a limit".into(),
        })?;
        let limit: u64 = limit_str.parse().map_err(|_| ArithError::Parse {
            line: 1,
            reason: format!("bad limit `{limit_str}`"),
        })?;
        let mut values = Vec::with_capacity(limit as usize);
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line.map_err(ArithError::Io)?;
            let (n_str, v_str) = line.split_once('\t').ok_or_else(|| ArithError::Parse {
                line: lineno,
                reason: "expected `n<TAB>value`".into(),
            })?;
            let n: u64 = n_str.parse().map_err(|_| ArithError::Parse {
                line: lineno,
                reason: format!("bad index `{n_str}`"),
            })?;
            if n != values.len() as u64 + 1 {
                return Err(ArithError::Parse {
                    line: lineno,
                    reason: format!("index {n} out of order"),
                });
            }
            let v: BigInt = v_str.parse().map_err(|_| ArithError::Parse {
                line: lineno,
                reason: format!("bad value `{v_str}`"),
            })?;
            values.push(v);
        }
        if values.len() as u64 != limit {
            return Err(ArithError::Parse {
                line: values.len() + 2,
                reason: format!("header promised {limit} rows, found {}", values.len()),
            });
        }
        Ok(CoefficientTable::from_values(label, values))
    }

    /// Sign of the value at `n`: `-1`, `0`, or `+1`.
    pub fn sign(&self, n: u64) -> i8 {
        let v = self.get(n);
        if v.is_zero() {
            0
        } else if v.is_negative() {
            -1
        } else {
            1
        }
    }
}

/// Builds the table of a multiplicative function from its values on prime
/// powers. `prime_power(p, nu)` returning `None` aborts with an error naming
/// the missing prime power.
pub fn extend_multiplicative<F>(
    sieve: &FactorSieve,
    limit: u64,
    label: impl Into<String>,
    mut prime_power: F,
) -> Result<CoefficientTable, ArithError>
where
    F: FnMut(u64, u32) -> Option<BigInt>,
{
    assert!(limit <= sieve.limit());
    let mut cache: HashMap<(u64, u32), BigInt> = HashMap::new();
    let mut values = Vec::with_capacity(limit as usize);
    values.push(BigInt::one());
    for n in 2..=limit {
        let mut acc = BigInt::one();
        for (p, e) in sieve.factorize(n) {
            if let std::collections::hash_map::Entry::Vacant(slot) = cache.entry((p, e)) {
                let v = prime_power(p, e).ok_or(ArithError::MissingPrimePower { p, nu: e })?;
                slot.insert(v);
            }
            acc *= &cache[&(p, e)];
        }
        values.push(acc);
    }
    Ok(CoefficientTable::from_values(label, values))
}
