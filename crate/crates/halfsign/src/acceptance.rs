//! The acceptance suite: fourteen checks covering every module, split into
//! hard criteria (exact identities and oracle equivalences that must pass
//! at stated tolerance) and advisory criteria (asymptotic bands whose
//! implied constants are not effective; deviations are reported, never
//! fatal).
//!
//! Each criterion is an independent function returning a report; `run_all`
//! executes them in order. Expensive default-instance tables are built once
//! and shared.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::gcd;

use crate::arithfn::FactorSieve;
use crate::bfree::{build_form_bset, BFreeSet};
use crate::dickman::{lemma42_rhs, DickmanTable};
use crate::eigenform::{FillRule, LiftBackend, SyntheticLift};
use crate::friable::{lemma41_ratio, pi_q, xi_count, xi_indicator, ModulusContext};
use crate::hsummatory::{compute_y_f, h_weighted_sum, prop1_ratio_report, HFunction};
use crate::shimura::{
    ell_local_factors, halfintegral_coefficients, hall_tenenbaum_constant, Character, FormInstance,
    HalfIntegralTable,
};

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub hard: bool,
    pub passed: bool,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
    pub details: Vec<String>,
    pub elapsed: Duration,
}

#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    warnings: Vec<String>,
    details: Vec<String>,
}

impl Checks {
    fn fail(&mut self, msg: String) {
        self.failures.push(msg);
    }

    fn require(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(msg());
        }
    }

    fn advise(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.warnings.push(msg());
        }
    }

    fn note(&mut self, msg: String) {
        self.details.push(msg);
    }
}

fn run(
    id: u32,
    title: &'static str,
    hard: bool,
    budget: Duration,
    body: impl FnOnce(&mut Checks),
) -> CriterionReport {
    let start = Instant::now();
    let mut c = Checks::default();
    body(&mut c);
    let elapsed = start.elapsed();
    if elapsed > budget {
        let msg = format!("runtime {elapsed:.2?} exceeded budget {budget:.2?}");
        if hard {
            c.failures.push(msg);
        } else {
            c.warnings.push(msg);
        }
    }
    CriterionReport {
        id,
        title,
        hard,
        passed: c.failures.is_empty(),
        failures: c.failures,
        warnings: c.warnings,
        details: c.details,
        elapsed,
    }
}

fn tab_10k() -> &'static HalfIntegralTable {
    static TAB: OnceLock<HalfIntegralTable> = OnceLock::new();
    TAB.get_or_init(|| {
        halfintegral_coefficients(FormInstance::default_delta(), 10_000)
            .expect("default table to 10^4")
    })
}

fn tab_100k() -> &'static HalfIntegralTable {
    static TAB: OnceLock<HalfIntegralTable> = OnceLock::new();
    TAB.get_or_init(|| {
        halfintegral_coefficients(FormInstance::default_delta(), 100_000)
            .expect("default table to 10^5")
    })
}

fn default_ctx() -> ModulusContext {
    ModulusContext::new(&FormInstance::default_delta(), 100)
}

/// Coefficients of `prod_{m <= degree} (1 - q^m)^24` by repeated in-place
/// binomial passes: an oracle independent of the production expansion.
/// The eigenvalue at `n` is the coefficient of `q^{n-1}`.
fn eta_truncation_oracle(degree: usize) -> Vec<BigInt> {
    let mut poly = vec![BigInt::from(0); degree + 1];
    poly[0] = BigInt::from(1);
    for m in 1..=degree {
        for _ in 0..24 {
            for i in (m..=degree).rev() {
                let lower = poly[i - m].clone();
                poly[i] -= lower;
            }
        }
    }
    poly
}

/// Trial-division friable indicator: square-free, `y`-smooth, coprime to
/// the listed primes. Shares no code with the sieve-walk production path.
fn brute_xi(n: u64, y: u64, q_primes: &[u64]) -> bool {
    let mut m = n;
    let mut d = 2u64;
    while d * d <= m {
        if m % d == 0 {
            m /= d;
            if m % d == 0 || d > y || q_primes.contains(&d) {
                return false;
            }
        }
        d += 1;
    }
    if m > 1 && (m > y || q_primes.contains(&m)) {
        return false;
    }
    true
}

fn brute_squarefree(n: u64) -> bool {
    let mut d = 2u64;
    while d * d <= n {
        if n % (d * d) == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Splittable 64-bit generator for reproducible window fuzzing.
struct SplitMix64(u64);

impl SplitMix64 {
    fn new(seed: u64) -> SplitMix64 {
        SplitMix64(seed)
    }

    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

fn random_coprime_set(rng: &mut SplitMix64) -> Vec<u64> {
    let target = 3 + rng.below(3) as usize;
    let mut elems: Vec<u64> = Vec::new();
    let mut attempts = 0;
    while elems.len() < target && attempts < 200 {
        attempts += 1;
        let cand = 2 + rng.below(298);
        if elems.iter().all(|&b| gcd(b, cand) == 1) {
            elems.push(cand);
        }
    }
    elems
}

pub fn criterion_01() -> CriterionReport {
    run(
        1,
        "eta-product eigenvalues satisfy the Hecke structure",
        true,
        Duration::from_secs(30),
        |c| {
            let eigen = tab_10k().eigen();
            match eigen.verify_hecke_recurrence() {
                Ok(n) => c.note(format!(
                    "three-term recurrence verified at {n} prime powers"
                )),
                Err(e) => c.fail(format!("recurrence check failed: {e}")),
            }
            match eigen.values().verify_multiplicative(tab_10k().sieve()) {
                Ok(pairs) => c.note(format!("multiplicative over {pairs} coprime pairs")),
                Err(e) => c.fail(format!("multiplicativity failed: {e}")),
            }
            let oracle = eta_truncation_oracle(8);
            for (n, expect) in [(2u64, -24i64), (3, 252), (7, -16744)] {
                let from_oracle = &oracle[(n - 1) as usize];
                c.require(from_oracle == &BigInt::from(expect), || {
                    format!("oracle value at {n}: {from_oracle} vs {expect}")
                });
                c.require(eigen.c(n) == &BigInt::from(expect), || {
                    format!("table value at {n}: {} vs {expect}", eigen.c(n))
                });
            }
        },
    )
}

pub fn criterion_02() -> CriterionReport {
    run(
        2,
        "forward divisor sum reconstructs the eigenform exactly",
        true,
        Duration::from_secs(10),
        |c| match tab_10k().verify_forward() {
            Ok(n) => c.note(format!("round-trip exact for all n <= {n}")),
            Err(e) => c.fail(format!("forward reconstruction failed: {e}")),
        },
    )
}

pub fn criterion_03() -> CriterionReport {
    run(
        3,
        "scaled coefficients and their signs are multiplicative",
        true,
        Duration::from_secs(10),
        |c| {
            let tab = tab_10k();
            match tab.a_table().verify_multiplicative(tab.sieve()) {
                Ok(pairs) => c.note(format!("A multiplicative over {pairs} coprime pairs")),
                Err(e) => c.fail(format!("A multiplicativity failed: {e}")),
            }
            let a = tab.a_table();
            let limit = tab.limit();
            let mut sign_pairs = 0u64;
            'outer: for m in 2..=limit {
                if m * m > limit {
                    break;
                }
                for n in (m + 1)..=(limit / m) {
                    if gcd(m, n) != 1 {
                        continue;
                    }
                    sign_pairs += 1;
                    if a.sign(m * n) != a.sign(m) * a.sign(n) {
                        c.fail(format!("sign not multiplicative at ({m}, {n})"));
                        break 'outer;
                    }
                }
            }
            c.note(format!(
                "sign multiplicative over {sign_pairs} coprime pairs"
            ));
        },
    )
}

pub fn criterion_04() -> CriterionReport {
    run(
        4,
        "first negative index, positivity threshold, and benchmark",
        true,
        Duration::from_secs(1),
        |c| {
            let tab = tab_10k();
            let nf = tab.first_negative_index(tab.limit());
            c.require(nf.found == Some(7), || {
                format!("first negative index {:?}, expected 7", nf.found)
            });
            let threshold = compute_y_f(tab);
            c.require(threshold.y_f == 6 && threshold.witness == Some(7), || {
                format!(
                    "threshold y_f = {}, witness {:?}; expected 6 and 7",
                    threshold.y_f, threshold.witness
                )
            });
            let benchmark = 144f64.powf(0.45);
            c.require((nf.benchmark - benchmark).abs() < 1e-12, || {
                format!("benchmark field {} vs {benchmark}", nf.benchmark)
            });
            c.require(7.0 <= benchmark, || {
                format!("index 7 above benchmark {benchmark}")
            });
            c.note(format!(
                "n = 7 found, threshold 6, benchmark (k^2 N)^{{9/20}} = {benchmark:.4}"
            ));
        },
    )
}

pub fn criterion_05() -> CriterionReport {
    run(
        5,
        "smooth-density solver: plateau, closed form, residual, crossover",
        true,
        Duration::from_secs(5),
        |c| {
            // Step 0.002 keeps the cubic interpolation error between knots
            // near 1e-11, inside the 1e-10 closed-form band.
            let rho = match DickmanTable::solve(3.0, 0.002) {
                Ok(t) => t,
                Err(e) => {
                    c.fail(format!("solver failed: {e}"));
                    return;
                }
            };
            for (u, v) in rho.knots().take_while(|&(u, _)| u <= 1.0) {
                c.require(v == 1.0, || format!("plateau broken at {u}: {v}"));
            }
            let mut worst_closed = 0.0f64;
            let mut u = 1.0;
            while u <= 2.0 {
                worst_closed = worst_closed.max((rho.rho(u) - (1.0 - u.ln())).abs());
                u += 1e-3;
            }
            c.require(worst_closed <= 1e-10, || {
                format!("closed form gap {worst_closed:.2e} above 1e-10 on [1, 2]")
            });
            c.require(rho.max_residual() <= 1e-8, || {
                format!("equation residual {:.2e} above 1e-8", rho.max_residual())
            });
            let fine = DickmanTable::solve(3.0, 0.001).expect("refined solve");
            let mut gap = 0.0f64;
            for (u, v) in rho.knots() {
                gap = gap.max((v - fine.rho(u)).abs());
            }
            c.require(gap <= 1e-9, || {
                format!("grid refinement gap {gap:.2e} above 1e-9")
            });
            match rho.kappa() {
                Ok(k) => {
                    c.require(k.left_endpoint > 0.0, || {
                        format!("F(10/9) = {} not positive", k.left_endpoint)
                    });
                    c.require(k.residual.abs() <= 1e-9, || {
                        format!("crossover residual {:.2e} above 1e-9", k.residual)
                    });
                    c.note(format!(
                        "kappa = {:.10}, F(10/9) = {:+.6e}, residual {:+.2e}",
                        k.value, k.left_endpoint, k.residual
                    ));
                }
                Err(e) => c.fail(format!("crossover solve failed: {e}")),
            }
            c.note(format!(
                "closed-form gap {worst_closed:.2e}, residual {:.2e}, refinement gap {gap:.2e}",
                rho.max_residual()
            ));
        },
    )
}

pub fn criterion_06() -> CriterionReport {
    run(
        6,
        "friable square-free census equals trial-division brute force",
        true,
        Duration::from_secs(60),
        |c| {
            let sieve = tab_10k().sieve();
            let q_sets: [&[u64]; 4] = [&[], &[2], &[2, 3], &[2, 3, 5]];
            let spots = [1u64, 2, 10, 100, 997, 1234, 5000, 9999, 10_000];
            for q in q_sets {
                for y in [10u64, 31, 100] {
                    let mut running = 0u64;
                    for n in 1..=10_000u64 {
                        let lib = xi_indicator(sieve, n, y, q);
                        let brute = brute_xi(n, y, q);
                        if lib != brute {
                            c.fail(format!("indicator mismatch at n = {n}, y = {y}, q = {q:?}"));
                            return;
                        }
                        if lib {
                            running += 1;
                        }
                        if spots.contains(&n) {
                            let counted = xi_count(sieve, n, y, q).expect("census").count;
                            c.require(counted == running, || {
                                format!(
                                    "census at x = {n}, y = {y}, q = {q:?}: {counted} vs {running}"
                                )
                            });
                        }
                    }
                }
                // Full-smoothness column: y equals the census bound.
                for &x in &spots {
                    let counted = xi_count(sieve, x, x, q).expect("census").count;
                    let brute = (1..=x).filter(|&n| brute_xi(n, x, q)).count() as u64;
                    c.require(counted == brute, || {
                        format!("census at x = y = {x}, q = {q:?}: {counted} vs {brute}")
                    });
                }
            }
            c.note("all prefixes to 10^4 across 4 coprimality sets and 4 smoothness levels".into());
        },
    )
}

pub fn criterion_07(seed: u64) -> CriterionReport {
    run(
        7,
        "interval and progression sieves equal brute-force divisibility",
        true,
        Duration::from_secs(60),
        |c| {
            let mut rng = SplitMix64::new(seed);
            let squares = BFreeSet::squares_of_primes(11_001);
            let fixed = [
                BFreeSet::explicit(vec![2]),
                BFreeSet::explicit(vec![3, 8, 35]),
                BFreeSet::explicit(vec![5, 6, 7, 11]),
            ];
            for i in 0..200u32 {
                let random_set;
                let set = match i % 5 {
                    0 => &fixed[0],
                    1 => &fixed[1],
                    2 => &fixed[2],
                    3 => &squares,
                    _ => {
                        random_set = BFreeSet::explicit(random_coprime_set(&mut rng));
                        &random_set
                    }
                };
                let x = rng.below(10_001);
                let y = 1 + rng.below(1_000);
                let got = set.sieve_interval(x, y).expect("window").count;
                let brute = (x + 1..=x + y)
                    .filter(|&n| set.elements().iter().all(|&b| n % b != 0))
                    .count() as u64;
                if got != brute {
                    c.fail(format!(
                        "window ({x}, {}] on {:?}: {got} vs {brute}",
                        x + y,
                        set.elements()
                    ));
                    return;
                }
            }
            c.note("200 seeded windows matched".into());

            let full = BFreeSet::squares_of_primes(100_000);
            let survivors = full.interval_survivors(0, 100_000).expect("full window");
            let expect: Vec<u64> = (1..=100_000u64).filter(|&n| brute_squarefree(n)).collect();
            c.require(survivors == expect, || {
                "square-of-prime survivors differ from the square-free integers".into()
            });
            c.note(format!(
                "square-free indicator reproduced on [1, 10^5]: {} survivors",
                expect.len()
            ));

            for (set, q) in [
                (BFreeSet::explicit(vec![2]), 3u64),
                (BFreeSet::explicit(vec![9, 25, 49]), 4),
                (BFreeSet::explicit(vec![2, 9, 77]), 5),
            ] {
                let total = set.sieve_interval(1_000, 500).expect("interval").count;
                let sum: u64 = (1..=q)
                    .map(|a| {
                        set.sieve_progression(1_000, 500, a, q)
                            .expect("progression")
                            .count
                    })
                    .sum();
                c.require(sum == total, || {
                    format!("progressions mod {q} sum to {sum}, interval has {total}")
                });
            }
            c.note("progression counts partition interval counts for q in {3, 4, 5}".into());
        },
    )
}

pub fn criterion_08() -> CriterionReport {
    run(
        8,
        "set-free indices have non-vanishing coefficients",
        true,
        Duration::from_secs(10),
        |c| {
            let tab = tab_10k();
            match build_form_bset(tab, 10_000).and_then(|fs| fs.verify_guarantee(tab)) {
                Ok(n) => c.note(format!("default instance: {n} free indices checked")),
                Err(e) => c.fail(format!("default instance: {e}")),
            }

            let mut lift = SyntheticLift::new(12, 1, FillRule::UnitPositive).expect("lift");
            for p in [11u64, 101] {
                lift.assign(p, BigInt::from(p).pow(5u32)).expect("assign");
            }
            let inst = FormInstance::new(6, 4, Character::Trivial, 1, LiftBackend::Synthetic(lift))
                .expect("instance");
            let synth = halfintegral_coefficients(inst, 10_000).expect("table");
            match build_form_bset(&synth, 10_000) {
                Ok(fs) => {
                    c.require(fs.vanishing_primes() == [11, 101], || {
                        format!("vanishing primes {:?}", fs.vanishing_primes())
                    });
                    match fs.verify_guarantee(&synth) {
                        Ok(n) => c.note(format!(
                            "synthetic with zeros at 11, 101: {n} free indices checked"
                        )),
                        Err(e) => c.fail(format!("synthetic instance: {e}")),
                    }
                }
                Err(e) => c.fail(format!("synthetic set build: {e}")),
            }
        },
    )
}

pub fn criterion_09() -> CriterionReport {
    run(
        9,
        "local factor recurrence closes in exact cleared form",
        true,
        Duration::from_secs(5),
        |c| {
            let tab = tab_10k();
            let ctx = default_ctx();
            let mut inside = 0u32;
            let mut outside = 0u32;
            for p in tab.sieve().primes().take_while(|&p| p <= 100) {
                match ell_local_factors(tab, &ctx, p, 6) {
                    Ok(f) => {
                        if f.in_restricted_support {
                            outside += 1;
                        } else {
                            inside += 1;
                        }
                        c.require(f.values[0].value == 1.0 && f.values[1].value == 0.0, || {
                            format!("p = {p}: ell(1) or ell(p) wrong")
                        });
                        for v in &f.values {
                            let cap = f.growth_base.powi(v.nu as i32) * (1.0 + 1e-9) + 1e-12;
                            c.require(v.value.abs() <= cap, || {
                                format!(
                                    "p = {p}, nu = {}: |ell| = {} above {cap}",
                                    v.nu,
                                    v.value.abs()
                                )
                            });
                        }
                    }
                    // Construction re-derives the convolution identity
                    // internally; an error here is an identity failure.
                    Err(e) => c.fail(format!("p = {p}: {e}")),
                }
            }
            c.note(format!(
                "25 primes, powers to 6; {inside} inside the modulus, {outside} in the restricted support"
            ));
        },
    )
}

pub fn criterion_10() -> CriterionReport {
    run(
        10,
        "oscillation constant matches to five decimals",
        true,
        Duration::from_secs(1),
        |c| {
            let ht = hall_tenenbaum_constant();
            let residual = ht.phi0.sin() - ht.phi0 * ht.phi0.cos() - std::f64::consts::FRAC_PI_2;
            c.require(residual.abs() <= 1e-12, || {
                format!("root residual {residual:.2e}")
            });
            c.require((ht.constant - 0.32867).abs() < 5e-6, || {
                format!("constant {} vs 0.32867", ht.constant)
            });
            c.note(format!("phi0 = {:.10}, K = {:.7}", ht.phi0, ht.constant));
        },
    )
}

pub fn criterion_11() -> CriterionReport {
    run(
        11,
        "sign balance under the envelope with non-increasing trend",
        false,
        Duration::from_secs(120),
        |c| {
            let rows = tab_100k().sign_balance_report(&[1_000, 10_000, 100_000]);
            let balances: Vec<f64> = rows.iter().map(|r| r.balance.unwrap_or(0.0)).collect();
            for r in &rows {
                c.note(format!(
                    "x = {}: plus {}, minus {}, balance {:.5}, envelope (log x)^(-1/4) = {:.5}",
                    r.x,
                    r.n_plus,
                    r.n_minus,
                    r.balance.unwrap_or(0.0),
                    r.envelope
                ));
            }
            let last = rows.last().expect("rows");
            c.advise(last.balance.unwrap_or(0.0) <= 3.0 * last.envelope, || {
                format!(
                    "balance {:.5} above envelope multiple {:.5}",
                    last.balance.unwrap_or(0.0),
                    3.0 * last.envelope
                )
            });
            c.advise(balances.windows(2).all(|w| w[1] <= w[0] + 1e-12), || {
                format!("balance trend not non-increasing: {balances:?}")
            });
        },
    )
}

pub fn criterion_12() -> CriterionReport {
    run(
        12,
        "negative coefficient density at primes near one half",
        false,
        Duration::from_secs(60),
        |c| {
            let d = tab_100k().negative_prime_density(100_000);
            c.note(format!(
                "{} of {} primes negative: fraction {:.5}, count * log x / x = {:.5}",
                d.negative_count, d.prime_count, d.fraction, d.lemma_ratio
            ));
            c.advise((d.fraction - 0.5).abs() <= 0.05, || {
                format!("fraction {:.5} outside 0.5 +/- 0.05", d.fraction)
            });
        },
    )
}

pub fn criterion_13() -> CriterionReport {
    run(
        13,
        "friable census within twenty percent of the density prediction",
        false,
        Duration::from_secs(120),
        |c| {
            let sieve = FactorSieve::new(31_623).expect("sieve to 1000^1.5");
            let rho = DickmanTable::solve(3.0, 0.005).expect("density table");
            for u in [1.0, 1.25, 1.5] {
                match lemma41_ratio(&sieve, &rho, 1_000, u, &[]) {
                    Ok(row) => {
                        c.note(format!(
                            "u = {u}: count {} vs predicted {:.1}, ratio {:.4}",
                            row.count, row.predicted, row.ratio
                        ));
                        c.advise(row.ratio >= 0.8 && row.ratio <= 1.2, || {
                            format!("ratio {:.4} outside [0.8, 1.2] at u = {u}", row.ratio)
                        });
                    }
                    Err(e) => c.warnings.push(format!("u = {u}: {e}")),
                }
            }
        },
    )
}

pub fn criterion_14() -> CriterionReport {
    run(
        14,
        "envelope ratios bounded; weighted-sum comparison finite; no exceptional primes",
        false,
        Duration::from_secs(180),
        |c| {
            let tab = tab_100k();
            let ctx = default_ctx();
            let report = prop1_ratio_report(tab, &ctx, &[100.0, 1_000.0, 10_000.0, 100_000.0]);
            for row in &report.rows {
                c.note(format!(
                    "x = {:>6}: S = {:+.4}, ratio to envelope {:.6}",
                    row.x, row.s, row.ratio
                ));
                c.advise(row.ratio.is_finite(), || {
                    format!("ratio not finite at x = {}", row.x)
                });
            }
            c.advise(!report.blowup, || {
                "summatory ratio grew more than tenfold across the grid".into()
            });

            let h = HFunction::new(ctx.clone(), 1_000, 1.0).expect("band function");
            let sieve = FactorSieve::new(4_000).expect("sieve for weighted sums");
            let rho = DickmanTable::solve(3.0, 0.005).expect("density table");
            let density = pi_q(ctx.primes()).expect("restricted density");
            for u in [1.0, 1.1, 1.2] {
                let lhs = h_weighted_sum(&h, &sieve, u);
                let rhs = lemma42_rhs(&rho, u, 1_000.0, density).expect("prediction");
                c.note(format!(
                    "u = {u}: weighted sum {lhs:+.3} vs prediction {rhs:+.3}"
                ));
                c.advise(lhs.is_finite() && rhs.is_finite(), || {
                    format!("weighted-sum comparison not finite at u = {u}")
                });
            }

            let serre = tab.serre_exceptional_count(100_000);
            c.note(format!(
                "exceptional primes to 10^5: {} against envelope {:.0}",
                serre.count, serre.envelope
            ));
            c.advise(serre.count == 0, || {
                format!("{} exceptional primes found, expected none", serre.count)
            });
        },
    )
}

/// Runs all fourteen criteria in order. The seed feeds the window fuzzing
/// in criterion 7; everything else is deterministic.
pub fn run_all(seed: u64) -> Vec<CriterionReport> {
    vec![
        criterion_01(),
        criterion_02(),
        criterion_03(),
        criterion_04(),
        criterion_05(),
        criterion_06(),
        criterion_07(seed),
        criterion_08(),
        criterion_09(),
        criterion_10(),
        criterion_11(),
        criterion_12(),
        criterion_13(),
        criterion_14(),
    ]
}
