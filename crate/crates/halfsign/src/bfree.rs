//! Sieves for `B`-free numbers: integers divisible by no element of a
//! fixed set `B` of pairwise coprime integers greater than one with
//! convergent reciprocal sum.
//!
//! A set here is always a finite truncation with a declared horizon: the
//! largest window endpoint it can sieve exactly (every member of the
//! untruncated set up to the horizon is present). Queries past the horizon
//! fail loudly rather than return silently wrong counts.
//!
//! The form-derived set pairs the vanishing primes of a coefficient table
//! with the squares of the non-vanishing ones; by multiplicativity, being
//! free of that set certifies a non-vanishing coefficient.

use crate::arithfn::FactorSieve;
use crate::shimura::{FormInstance, HalfIntegralTable};
use num_integer::{gcd, Roots};
use rayon::prelude::*;
use thiserror::Error;

/// Hard cap on window endpoints, matching the exact-enumeration budget.
pub const WINDOW_CAP: u64 = 1_000_000_000;

const SEGMENT_LEN: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum BFreeError {
    #[error("elements {a} and {b} share a factor")]
    NotCoprime { a: u64, b: u64 },
    #[error("element {0} is not greater than 1")]
    MinElement(u64),
    #[error("window ({x}, {x}+{y}] exceeds the enumeration cap {WINDOW_CAP}")]
    WindowTooLarge { x: u64, y: u64 },
    #[error("window reaches {needed} but the set is only exact up to {horizon}")]
    Coverage { needed: u64, horizon: u64 },
    #[error("residue {a} mod {q} is not a valid progression")]
    BadResidue { a: u64, q: u64 },
    #[error("gcd(a, q) shares a factor with element {b}")]
    ProgressionObstruction { b: u64 },
    #[error("prime bound {bound} exceeds the table limit {limit}")]
    OutOfRange { bound: u64, limit: u64 },
    #[error("guarantee broken: n = {n} is free of the set but A(n) = 0")]
    GuaranteeBroken { n: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenerationRule {
    Explicit,
    SquaresOfPrimes,
    FromForm,
}

#[derive(Clone, Debug)]
pub struct BFreeSet {
    elements: Vec<u64>,
    rule: GenerationRule,
    horizon: u64,
}

/// Validation summary: the Erdős conditions checked on the truncation.
#[derive(Clone, Copy, Debug)]
pub struct BFreeCertificate {
    pub pairs_checked: u64,
    /// Partial reciprocal sum over the truncation.
    pub reciprocal_sum: f64,
    /// Integral-comparison bound on the reciprocal tail beyond the
    /// truncation, for rule-generated sets. For the form rule this covers
    /// only the square part; the vanishing-prime part converges by the
    /// thin-set bound but with an ineffective constant.
    pub tail_bound: Option<f64>,
}

impl BFreeSet {
    /// A caller-supplied complete set: the truncation is the whole set, so
    /// any window is exact.
    pub fn explicit(mut elements: Vec<u64>) -> BFreeSet {
        elements.sort_unstable();
        elements.dedup();
        BFreeSet {
            elements,
            rule: GenerationRule::Explicit,
            horizon: u64::MAX,
        }
    }

    /// Squares of primes up to the horizon; free numbers are exactly the
    /// square-free ones.
    pub fn squares_of_primes(horizon: u64) -> BFreeSet {
        let root = horizon.sqrt();
        let elements = if root < 2 {
            Vec::new()
        } else {
            FactorSieve::new(root)
                .expect("root of horizon within sieve capacity")
                .primes()
                .map(|p| p * p)
                .filter(|&b| b <= horizon)
                .collect()
        };
        BFreeSet {
            elements,
            rule: GenerationRule::SquaresOfPrimes,
            horizon,
        }
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn rule(&self) -> GenerationRule {
        self.rule
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn contains(&self, b: u64) -> bool {
        self.elements.binary_search(&b).is_ok()
    }

    /// Checks the Erdős conditions on the truncation: every element above
    /// one, pairwise coprime, with the reciprocal sum and (where the rule
    /// permits) a tail bound.
    pub fn validate(&self) -> Result<BFreeCertificate, BFreeError> {
        if let Some(&b) = self.elements.first() {
            if b <= 1 {
                return Err(BFreeError::MinElement(b));
            }
        }
        let mut pairs = 0u64;
        for (i, &a) in self.elements.iter().enumerate() {
            for &b in &self.elements[i + 1..] {
                pairs += 1;
                if gcd(a, b) != 1 {
                    return Err(BFreeError::NotCoprime { a, b });
                }
            }
        }
        let reciprocal_sum = self.elements.iter().map(|&b| 1.0 / b as f64).sum();
        let tail_bound = match self.rule {
            GenerationRule::Explicit => None,
            // Missing squares are p^2 > horizon: sum 1/p^2 < integral of
            // 1/t^2 from sqrt(horizon).
            GenerationRule::SquaresOfPrimes => Some(1.0 / self.horizon.sqrt().max(1) as f64),
            // Missing squares are p^2 with p > horizon.
            GenerationRule::FromForm => Some(1.0 / self.horizon.max(1) as f64),
        };
        Ok(BFreeCertificate {
            pairs_checked: pairs,
            reciprocal_sum,
            tail_bound,
        })
    }

    fn check_window(&self, x: u64, y: u64) -> Result<u64, BFreeError> {
        let end = x
            .checked_add(y)
            .filter(|&end| end <= WINDOW_CAP)
            .ok_or(BFreeError::WindowTooLarge { x, y })?;
        if end > self.horizon {
            return Err(BFreeError::Coverage {
                needed: end,
                horizon: self.horizon,
            });
        }
        Ok(end)
    }

    /// Free/marked flags for `(seg_start, seg_end]`.
    fn segment_flags(&self, seg_start: u64, seg_end: u64) -> Vec<bool> {
        let mut free = vec![true; (seg_end - seg_start) as usize];
        for &b in &self.elements {
            if b > seg_end {
                break;
            }
            let mut m = (seg_start / b + 1) * b;
            while m <= seg_end {
                free[(m - seg_start - 1) as usize] = false;
                m += b;
            }
        }
        free
    }

    fn segments(x: u64, end: u64) -> Vec<(u64, u64)> {
        let mut segs = Vec::new();
        let mut start = x;
        while start < end {
            let stop = (start + SEGMENT_LEN).min(end);
            segs.push((start, stop));
            start = stop;
        }
        segs
    }

    /// The free numbers in `(x, x+y]`, in order.
    pub fn interval_survivors(&self, x: u64, y: u64) -> Result<Vec<u64>, BFreeError> {
        let end = self.check_window(x, y)?;
        let lists: Vec<Vec<u64>> = Self::segments(x, end)
            .par_iter()
            .map(|&(s, e)| {
                self.segment_flags(s, e)
                    .iter()
                    .enumerate()
                    .filter(|(_, &f)| f)
                    .map(|(i, _)| s + i as u64 + 1)
                    .collect()
            })
            .collect();
        Ok(lists.concat())
    }

    /// Count of free numbers in `(x, x+y]` with the window-size benchmark
    /// `x^{7/17}`: the exponent below which the count stops being provably
    /// of order `y`. Reported, never asserted; the implied constants are
    /// ineffective.
    pub fn sieve_interval(&self, x: u64, y: u64) -> Result<IntervalReport, BFreeError> {
        let end = self.check_window(x, y)?;
        let count: u64 = Self::segments(x, end)
            .par_iter()
            .map(|&(s, e)| self.segment_flags(s, e).iter().filter(|&&f| f).count() as u64)
            .sum();
        let benchmark_y = (x as f64).powf(7.0 / 17.0);
        Ok(IntervalReport {
            x,
            y,
            count,
            density: if y == 0 { 0.0 } else { count as f64 / y as f64 },
            benchmark_y,
            meets_benchmark: y as f64 >= benchmark_y,
        })
    }

    /// Count of free numbers congruent to `a` mod `q` in `(x, x+y]`,
    /// normalized by `q/y`. Requires `1 <= a <= q` and `gcd(a, q)` coprime
    /// to every element; otherwise the progression is structurally starved
    /// and the count means nothing.
    pub fn sieve_progression(
        &self,
        x: u64,
        y: u64,
        a: u64,
        q: u64,
    ) -> Result<ProgressionReport, BFreeError> {
        if q == 0 || a == 0 || a > q {
            return Err(BFreeError::BadResidue { a, q });
        }
        let g = gcd(a, q);
        if g > 1 {
            if let Some(&b) = self.elements.iter().find(|&&b| gcd(g, b) > 1) {
                return Err(BFreeError::ProgressionObstruction { b });
            }
        }
        let end = self.check_window(x, y)?;
        let residue = a % q;
        let count: u64 = Self::segments(x, end)
            .par_iter()
            .map(|&(s, e)| {
                self.segment_flags(s, e)
                    .iter()
                    .enumerate()
                    .filter(|&(i, &f)| f && (s + i as u64 + 1) % q == residue)
                    .count() as u64
            })
            .sum();
        let benchmark_y = (x as f64).powf(17.0 / 38.0);
        Ok(ProgressionReport {
            x,
            y,
            a,
            q,
            count,
            normalized: if y == 0 {
                0.0
            } else {
                count as f64 * q as f64 / y as f64
            },
            benchmark_y,
            meets_benchmark: y as f64 >= benchmark_y,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IntervalReport {
    pub x: u64,
    pub y: u64,
    pub count: u64,
    pub density: f64,
    pub benchmark_y: f64,
    pub meets_benchmark: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct ProgressionReport {
    pub x: u64,
    pub y: u64,
    pub a: u64,
    pub q: u64,
    pub count: u64,
    /// `count * q / y`: near the free density when the progression is fair.
    pub normalized: f64,
    pub benchmark_y: f64,
    pub meets_benchmark: bool,
}

/// The set derived from a coefficient table: vanishing primes, plus squares
/// of the primes that do not vanish.
#[derive(Clone, Debug)]
pub struct FormBSet {
    instance: FormInstance,
    vanishing: Vec<u64>,
    set: BFreeSet,
    prime_bound: u64,
}

/// Scans `A(p)` for primes up to `prime_bound` and assembles the set. The
/// horizon is the prime bound: past it, vanishing primes are unknown.
pub fn build_form_bset(tab: &HalfIntegralTable, prime_bound: u64) -> Result<FormBSet, BFreeError> {
    if prime_bound > tab.limit() {
        return Err(BFreeError::OutOfRange {
            bound: prime_bound,
            limit: tab.limit(),
        });
    }
    let mut vanishing = Vec::new();
    let mut elements = Vec::new();
    for p in tab.sieve().primes().take_while(|&p| p <= prime_bound) {
        if tab.a_table().sign(p) == 0 {
            vanishing.push(p);
            elements.push(p);
        } else {
            elements.push(p * p);
        }
    }
    elements.sort_unstable();
    Ok(FormBSet {
        instance: tab.instance().clone(),
        vanishing,
        set: BFreeSet {
            elements,
            rule: GenerationRule::FromForm,
            horizon: prime_bound,
        },
        prime_bound,
    })
}

impl FormBSet {
    pub fn instance(&self) -> &FormInstance {
        &self.instance
    }

    pub fn vanishing_primes(&self) -> &[u64] {
        &self.vanishing
    }

    pub fn set(&self) -> &BFreeSet {
        &self.set
    }

    pub fn prime_bound(&self) -> u64 {
        self.prime_bound
    }

    /// Direct verification of the non-vanishing guarantee: every free
    /// number within the horizon has a nonzero coefficient. Returns how
    /// many indices were checked.
    pub fn verify_guarantee(&self, tab: &HalfIntegralTable) -> Result<u64, BFreeError> {
        let bound = self.prime_bound.min(tab.limit());
        let mut checked = 0;
        for n in self.set.interval_survivors(0, bound)? {
            if tab.a_table().sign(n) == 0 {
                return Err(BFreeError::GuaranteeBroken { n });
            }
            checked += 1;
        }
        Ok(checked)
    }

    /// Partial sum of reciprocals of vanishing primes, with the thin-set
    /// envelope `x / (log x)^{5/4}` at the prime bound for context.
    pub fn vanishing_reciprocal_sum(&self) -> ReciprocalSum {
        let x = self.prime_bound as f64;
        ReciprocalSum {
            sum: self.vanishing.iter().map(|&p| 1.0 / p as f64).sum(),
            prime_bound: self.prime_bound,
            serre_envelope: x / x.ln().max(1.0).powf(1.25),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ReciprocalSum {
    pub sum: f64,
    pub prime_bound: u64,
    pub serre_envelope: f64,
}
