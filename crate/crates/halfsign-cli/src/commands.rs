//! One function per subcommand. Every command resolves its capacities from
//! the config, runs the library, and emits artifacts (CSV for grids, JSON
//! for single-object reports) plus the canonical config it ran under.
//!
//! Artifacts never contain wall-clock times or other run-varying data: a
//! fixed config and seed must reproduce every byte.

use std::fmt::Write as _;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde_json::json;

use halfsign::acceptance::run_all;
use halfsign::arithfn::FactorSieve;
use halfsign::bfree::{build_form_bset, BFreeError, BFreeSet};
use halfsign::dickman::{lemma42_rhs, DickmanTable};
use halfsign::friable::{lemma41_ratio, pi_q, ModulusContext};
use halfsign::hsummatory::{
    compute_y_f, h_weighted_sum, prop1_ratio_report, prop2_chain_check, HFunction,
};
use halfsign::shimura::{halfintegral_coefficients, HalfIntegralTable};

use crate::artifacts::Artifacts;
use crate::config::{BFreeSelection, RunConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SignReportKind {
    /// Counts of positive/negative census signs across the x grid.
    Balance,
    /// Oscillation lower-bound comparison across the x grid.
    Ht,
    /// Negative and vanishing prime densities at x.
    Density,
}

fn table(cfg: &RunConfig, limit: u64) -> Result<HalfIntegralTable> {
    let instance = cfg.build_instance()?;
    Ok(halfintegral_coefficients(instance, limit)?)
}

fn artifacts(cfg: &RunConfig) -> Artifacts {
    let mut a = Artifacts::new(&cfg.out);
    a.add_text("run_config.txt", cfg.to_experiment_string());
    a
}

fn grid_max(grid: &[u64]) -> u64 {
    grid.iter().copied().max().unwrap_or(0)
}

fn u_grid_max(grid: &[f64]) -> f64 {
    grid.iter().copied().fold(1.0, f64::max)
}

pub fn coeffs(cfg: &RunConfig) -> Result<()> {
    let tab = table(cfg, cfg.x)?;
    let mut csv = String::from("n,a,c,eps,a_star\n");
    for n in 1..=cfg.x {
        let _ = writeln!(
            csv,
            "{n},{},{},{},{}",
            tab.a(n),
            tab.c(n),
            tab.a_table().sign(n),
            tab.a_star(n)
        );
    }
    let mut arts = artifacts(cfg);
    arts.add_text("coeffs.csv", csv);
    arts.finish()?;
    println!("coefficient table for n <= {} written", cfg.x);
    Ok(())
}

pub fn signs(cfg: &RunConfig, kind: SignReportKind) -> Result<()> {
    let limit = cfg.x.max(grid_max(&cfg.x_grid));
    let tab = table(cfg, limit)?;
    let mut arts = artifacts(cfg);
    match kind {
        SignReportKind::Balance => {
            let rows = tab.sign_balance_report(&cfg.x_grid);
            let mut csv = String::from("x,n_star,n_plus,n_minus,n_zero,balance,envelope\n");
            for r in &rows {
                let balance = r.balance.map(|b| b.to_string()).unwrap_or_default();
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{balance},{}",
                    r.x, r.n_star, r.n_plus, r.n_minus, r.n_zero, r.envelope
                );
                println!(
                    "x = {}: plus {}, minus {}, balance {}",
                    r.x,
                    r.n_plus,
                    r.n_minus,
                    r.balance.map(|b| format!("{b:.5}")).unwrap_or_default()
                );
            }
            arts.add_text("signs_balance.csv", csv);
        }
        SignReportKind::Ht => {
            let report = tab.hall_tenenbaum_report(&cfg.x_grid);
            let mut csv = String::from("x,lhs,rhs,ratio\n");
            for r in &report.rows {
                let _ = writeln!(csv, "{},{},{},{}", r.x, r.lhs, r.rhs, r.ratio);
                println!(
                    "x = {}: |sum eps| = {:.1}, floor = {:.1}",
                    r.x, r.lhs, r.rhs
                );
            }
            arts.add_text("signs_ht.csv", csv);
            arts.add_json(
                "signs_ht.json",
                &json!({
                    "phi0": report.constant.phi0,
                    "constant": report.constant.constant,
                }),
            )?;
        }
        SignReportKind::Density => {
            let d = tab.negative_prime_density(cfg.x);
            let s = tab.serre_exceptional_count(cfg.x);
            arts.add_json(
                "signs_density.json",
                &json!({
                    "x": d.x,
                    "prime_count": d.prime_count,
                    "negative_count": d.negative_count,
                    "fraction": d.fraction,
                    "lemma_ratio": d.lemma_ratio,
                    "exceptional_count": s.count,
                    "exceptional_envelope": s.envelope,
                }),
            )?;
            println!(
                "{} of {} primes negative (fraction {:.5}); {} exceptional",
                d.negative_count, d.prime_count, d.fraction, s.count
            );
        }
    }
    arts.finish()
}

pub fn nf(cfg: &RunConfig) -> Result<()> {
    let tab = table(cfg, cfg.x)?;
    let first = tab.first_negative_index(cfg.x);
    let threshold = compute_y_f(&tab);
    let mut arts = artifacts(cfg);
    arts.add_json(
        "nf.json",
        &json!({
            "search_bound": first.search_bound,
            "found": first.found,
            "benchmark": first.benchmark,
            "y_f": threshold.y_f,
            "witness": threshold.witness,
        }),
    )?;
    arts.finish()?;
    match first.found {
        Some(n) => println!(
            "first negative census index {n}; threshold {}; benchmark {:.4}",
            threshold.y_f, first.benchmark
        ),
        None => println!(
            "no negative census index up to {}; benchmark {:.4}",
            first.search_bound, first.benchmark
        ),
    }
    Ok(())
}

pub fn gaps(cfg: &RunConfig) -> Result<()> {
    let tab = table(cfg, cfg.x)?;
    let g = tab.vanishing_gaps(cfg.x);
    let mut arts = artifacts(cfg);
    arts.add_json(
        "gaps.json",
        &json!({
            "x": g.x,
            "max_gap": g.max_gap,
            "start": g.start,
            "benchmark": g.benchmark,
            "censored": g.censored,
        }),
    )?;
    arts.finish()?;
    println!(
        "longest vanishing run up to {}: {} (start {:?}, censored {})",
        g.x, g.max_gap, g.start, g.censored
    );
    Ok(())
}

pub fn dickman(cfg: &RunConfig) -> Result<()> {
    let rho = DickmanTable::solve(cfg.u_max, cfg.step)?;
    let mut csv = String::from("u,rho\n");
    for (u, v) in rho.knots() {
        let _ = writeln!(csv, "{u},{v}");
    }
    let mut arts = artifacts(cfg);
    arts.add_text("dickman.csv", csv);
    match rho.kappa() {
        Ok(k) => {
            arts.add_json(
                "kappa.json",
                &json!({
                    "value": k.value,
                    "residual": k.residual,
                    "left_endpoint": k.left_endpoint,
                    "u_max": rho.u_max(),
                    "step": rho.step(),
                    "max_residual": rho.max_residual(),
                }),
            )?;
            println!("kappa = {:.10}", k.value);
        }
        Err(e) => println!("crossover not computed: {e}"),
    }
    arts.finish()?;
    println!(
        "density table on [0, {}] at step {} (residual {:.2e})",
        rho.u_max(),
        rho.step(),
        rho.max_residual()
    );
    Ok(())
}

pub fn friable(cfg: &RunConfig) -> Result<()> {
    let rho = DickmanTable::solve(cfg.u_max, cfg.step)?;
    let x_max = (cfg.y as f64).powf(u_grid_max(&cfg.u_grid)).floor() as u64 + 1;
    let sieve = FactorSieve::new(x_max)?;
    let mut csv = String::from("y,u,x,count,pi_q,predicted,ratio,envelope\n");
    for &u in &cfg.u_grid {
        let row = lemma41_ratio(&sieve, &rho, cfg.y, u, &cfg.q)?;
        let _ = writeln!(
            csv,
            "{},{u},{},{},{},{},{},{}",
            row.y, row.x, row.count, row.pi_q, row.predicted, row.ratio, row.envelope
        );
        println!(
            "y = {}, u = {u}: count {} vs predicted {:.1} (ratio {:.4})",
            row.y, row.count, row.predicted, row.ratio
        );
    }
    let mut arts = artifacts(cfg);
    arts.add_text("friable.csv", csv);
    arts.finish()
}

pub fn lemma42(cfg: &RunConfig) -> Result<()> {
    let instance = cfg.build_instance()?;
    let ctx = ModulusContext::new(&instance, cfg.c0);
    let density = pi_q(ctx.primes())?;
    let max_u = u_grid_max(&cfg.u_grid);
    let x_max = (cfg.y as f64).powf(max_u).floor() as u64 + 1;
    if x_max > 10_000_000 {
        bail!("y^u = {x_max} exceeds the weighted-sum capacity of 10^7");
    }
    let rho = DickmanTable::solve(cfg.u_max.max(2.0 * max_u + 0.01), cfg.step)?;
    let h = HFunction::new(ctx, cfg.y, cfg.c)?;
    let sieve = FactorSieve::new(x_max)?;
    let mut csv = String::from("u,x,weighted_sum,prediction,ratio\n");
    for &u in &cfg.u_grid {
        let x = (cfg.y as f64).powf(u).floor();
        let lhs = h_weighted_sum(&h, &sieve, u);
        let rhs = lemma42_rhs(&rho, u, cfg.y as f64, density)?;
        let ratio = lhs / rhs;
        let _ = writeln!(csv, "{u},{x},{lhs},{rhs},{ratio}");
        println!("u = {u}: weighted sum {lhs:+.3} vs prediction {rhs:+.3}");
    }
    let mut arts = artifacts(cfg);
    arts.add_text("lemma42.csv", csv);
    arts.finish()
}

pub fn summatory(cfg: &RunConfig) -> Result<()> {
    let limit = cfg.x.max(grid_max(&cfg.x_grid));
    let tab = table(cfg, limit)?;
    let instance = tab.instance().clone();
    let ctx = ModulusContext::new(&instance, cfg.c0);
    let grid: Vec<f64> = cfg.x_grid.iter().map(|&x| x as f64).collect();
    let report = prop1_ratio_report(&tab, &ctx, &grid);
    let mut csv = String::from("x,s,envelope,ratio\n");
    for r in &report.rows {
        let _ = writeln!(csv, "{},{},{},{}", r.x, r.s, r.envelope, r.ratio);
        println!(
            "x = {}: S = {:+.4}, ratio to envelope {:.6}",
            r.x, r.s, r.ratio
        );
    }

    let threshold = compute_y_f(&tab);
    let x_chain = (threshold.y_f.max(1) as f64).powf(cfg.u);
    if x_chain > tab.limit() as f64 {
        bail!(
            "chain bound y_f^u = {x_chain:.1} exceeds the table limit {}",
            tab.limit()
        );
    }
    let h = HFunction::new(ctx, threshold.y_f.max(1), cfg.c)?;
    let chain = prop2_chain_check(&tab, &h, cfg.u);

    let mut arts = artifacts(cfg);
    arts.add_text("summatory.csv", csv);
    arts.add_json(
        "summatory.json",
        &json!({
            "epsilon": report.epsilon,
            "blowup": report.blowup,
        }),
    )?;
    arts.add_json(
        "prop2.json",
        &json!({
            "status": format!("{:?}", chain.status),
            "y_f": chain.y_f,
            "witness": chain.witness,
            "u": chain.u,
            "x": chain.x,
            "lhs": chain.lhs,
            "rhs": chain.rhs,
            "supported_min_g": chain.supported_min_g.map(|(p, v)| json!({"p": p, "g": v})),
        }),
    )?;
    arts.finish()?;
    println!(
        "chain inequality at u = {}: {:?} (lhs {:+.4}, rhs {:+.4})",
        cfg.u, chain.status, chain.lhs, chain.rhs
    );
    Ok(())
}

pub fn bfree(cfg: &RunConfig) -> Result<()> {
    let window_end = cfg
        .x
        .checked_add(cfg.y)
        .context("window end x + y overflows")?;
    let mut form_json = serde_json::Value::Null;
    let set: BFreeSet = match &cfg.bfree {
        BFreeSelection::Squares => BFreeSet::squares_of_primes(window_end),
        BFreeSelection::Explicit(els) => BFreeSet::explicit(els.clone()),
        BFreeSelection::Form => {
            let tab = table(cfg, window_end)?;
            let fs = build_form_bset(&tab, window_end)?;
            let checked = fs.verify_guarantee(&tab)?;
            let recip = fs.vanishing_reciprocal_sum();
            form_json = json!({
                "vanishing_primes": fs.vanishing_primes(),
                "vanishing_reciprocal_sum": recip.sum,
                "serre_envelope": recip.serre_envelope,
                "guarantee_checked": checked,
            });
            println!(
                "form set: {} vanishing primes, guarantee verified on {} free indices",
                fs.vanishing_primes().len(),
                checked
            );
            fs.set().clone()
        }
    };

    let cert = set.validate()?;
    let interval = set.sieve_interval(cfg.x, cfg.y)?;
    let survivors = set.interval_survivors(cfg.x, cfg.y)?;

    let mut survivors_csv = String::from("n\n");
    for n in &survivors {
        let _ = writeln!(survivors_csv, "{n}");
    }

    let mut progression_rows = Vec::new();
    if cfg.modulus > 0 {
        let residues: Vec<u64> = if cfg.residue > 0 {
            vec![cfg.residue]
        } else {
            (1..=cfg.modulus).collect()
        };
        for a in residues {
            match set.sieve_progression(cfg.x, cfg.y, a, cfg.modulus) {
                Ok(r) => {
                    println!(
                        "residue {} mod {}: {} survivors (normalized {:.1})",
                        r.a, r.q, r.count, r.normalized
                    );
                    progression_rows.push(r);
                }
                // A sweep over every residue tolerates obstructed classes;
                // a residue the user named explicitly does not.
                Err(BFreeError::ProgressionObstruction { b }) if cfg.residue == 0 => {
                    println!(
                        "residue {a} mod {}: obstructed by element {b}, skipped",
                        cfg.modulus
                    );
                }
                Err(e) => return Err(e.into()),
            }
        }
    }

    let mut arts = artifacts(cfg);
    let horizon = set.horizon();
    arts.add_json(
        "bfree.json",
        &json!({
            "rule": format!("{:?}", set.rule()),
            "element_count": set.elements().len(),
            "horizon": horizon,
            "certificate": {
                "pairs_checked": cert.pairs_checked,
                "reciprocal_sum": cert.reciprocal_sum,
                "tail_bound": cert.tail_bound,
            },
            "interval": {
                "x": interval.x,
                "y": interval.y,
                "count": interval.count,
                "density": interval.density,
                "benchmark_y": interval.benchmark_y,
                "meets_benchmark": interval.meets_benchmark,
            },
            "form": form_json,
        }),
    )?;
    arts.add_text("bfree_survivors.csv", survivors_csv);
    if !progression_rows.is_empty() {
        let mut csv = String::from("x,y,a,q,count,normalized,benchmark_y,meets_benchmark\n");
        for r in &progression_rows {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{}",
                r.x, r.y, r.a, r.q, r.count, r.normalized, r.benchmark_y, r.meets_benchmark
            );
        }
        arts.add_text("bfree_progressions.csv", csv);
    }
    arts.finish()?;
    println!(
        "window ({}, {window_end}]: {} survivors of {} (density {:.4})",
        cfg.x, interval.count, cfg.y, interval.density
    );
    Ok(())
}

pub fn accept(cfg: &RunConfig, as_json: bool) -> Result<ExitCode> {
    let reports = run_all(cfg.seed);
    let mut hard_failures = 0u32;
    let mut rows = Vec::new();
    for r in &reports {
        if r.hard && !r.passed {
            hard_failures += 1;
        }
        // No timings in the artifact: bytes must not vary between runs.
        rows.push(json!({
            "id": r.id,
            "title": r.title,
            "hard": r.hard,
            "passed": r.passed,
            "failures": r.failures,
            "warnings": r.warnings,
            "details": r.details,
        }));
        if !as_json {
            let kind = if r.hard { "hard    " } else { "advisory" };
            let verdict = if r.passed { "pass" } else { "FAIL" };
            println!(
                "criterion {:02} [{kind}] {verdict} {:>8.2?}  {}",
                r.id, r.elapsed, r.title
            );
            for d in &r.details {
                println!("    {d}");
            }
            for w in &r.warnings {
                println!("    warning: {w}");
            }
            for f in &r.failures {
                println!("    failure: {f}");
            }
        }
    }
    let value = serde_json::Value::Array(rows);
    if as_json {
        println!("{}", serde_json::to_string_pretty(&value)?);
    }
    let mut arts = artifacts(cfg);
    arts.add_json("acceptance.json", &value)?;
    arts.finish()?;
    if hard_failures > 0 {
        eprintln!("{hard_failures} hard criteria failed");
        Ok(ExitCode::FAILURE)
    } else {
        Ok(ExitCode::SUCCESS)
    }
}
