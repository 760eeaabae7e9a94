//! Run configuration: a plain-text `key=value` file with defaults for every
//! key. The serialization is canonical, so a parsed config re-serializes to
//! the same bytes and a saved config reproduces the run exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use num_bigint::BigInt;

use halfsign::eigenform::{FillRule, LiftBackend, SyntheticLift};
use halfsign::shimura::{Character, FormInstance};

#[derive(Clone, Debug, PartialEq)]
pub enum FormSelection {
    /// The built-in default instance.
    Delta,
    /// A synthetic lift described by a separate key=value file.
    Synthetic(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub enum BFreeSelection {
    /// Squares of all primes: the square-free sieve.
    Squares,
    /// The set derived from vanishing coefficients of the selected form.
    Form,
    /// A caller-supplied complete list of pairwise coprime elements.
    Explicit(Vec<u64>),
}

/// Everything a run depends on besides the subcommand itself. Unknown keys
/// are errors; omitted keys take the listed defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// `form`: `delta` or `synthetic:PATH`.
    pub form: FormSelection,
    /// `x`: main census bound / table limit.
    pub x: u64,
    /// `y`: band threshold and sieve window length.
    pub y: u64,
    /// `c0`: sieve-modulus prime cutoff is the largest prime `<= c0 k N`.
    pub c0: u64,
    /// `c`: band depression constant.
    pub c: f64,
    /// `u`: single exponent for the chain inequality.
    pub u: f64,
    /// `x_grid`: comma-separated census bounds for grid reports.
    pub x_grid: Vec<u64>,
    /// `u_grid`: comma-separated exponents for friable / weighted-sum grids.
    pub u_grid: Vec<f64>,
    /// `step`: solver grid step.
    pub step: f64,
    /// `u_max`: solver range.
    pub u_max: f64,
    /// `q`: comma-separated primes excluded from the friable census.
    pub q: Vec<u64>,
    /// `bfree`: `squares`, `form`, or `explicit:B1,B2,...`.
    pub bfree: BFreeSelection,
    /// `residue`: progression residue (0 = interval only).
    pub residue: u64,
    /// `modulus`: progression modulus (0 = interval only).
    pub modulus: u64,
    /// `out`: artifact directory.
    pub out: PathBuf,
    /// `seed`: seed for randomized property tests.
    pub seed: u64,
    /// `threads`: worker threads (0 = library default).
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            form: FormSelection::Delta,
            x: 10_000,
            y: 1_000,
            c0: 100,
            c: 1.0,
            u: 1.0,
            x_grid: vec![1_000, 10_000],
            u_grid: vec![1.0, 1.25, 1.5],
            step: 0.002,
            u_max: 3.0,
            q: Vec::new(),
            bfree: BFreeSelection::Squares,
            residue: 0,
            modulus: 0,
            out: PathBuf::from("out"),
            seed: 42,
            threads: 0,
        }
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn split_list<T: std::str::FromStr>(key: &str, s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<T>()
                .map_err(|e| anyhow::anyhow!("config key `{key}`: bad entry `{tok}`: {e}"))
        })
        .collect()
}

impl RunConfig {
    /// Canonical serialization: one `key=value` line per field, fixed order.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let form = match &self.form {
            FormSelection::Delta => "delta".to_string(),
            FormSelection::Synthetic(p) => format!("synthetic:{}", p.display()),
        };
        let bfree = match &self.bfree {
            BFreeSelection::Squares => "squares".to_string(),
            BFreeSelection::Form => "form".to_string(),
            BFreeSelection::Explicit(els) => format!("explicit:{}", join(els)),
        };
        let _ = writeln!(s, "form={form}");
        let _ = writeln!(s, "x={}", self.x);
        let _ = writeln!(s, "y={}", self.y);
        let _ = writeln!(s, "c0={}", self.c0);
        let _ = writeln!(s, "c={}", self.c);
        let _ = writeln!(s, "u={}", self.u);
        let _ = writeln!(s, "x_grid={}", join(&self.x_grid));
        let _ = writeln!(s, "u_grid={}", join(&self.u_grid));
        let _ = writeln!(s, "step={}", self.step);
        let _ = writeln!(s, "u_max={}", self.u_max);
        let _ = writeln!(s, "q={}", join(&self.q));
        let _ = writeln!(s, "bfree={bfree}");
        let _ = writeln!(s, "residue={}", self.residue);
        let _ = writeln!(s, "modulus={}", self.modulus);
        let _ = writeln!(s, "out={}", self.out.display());
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "threads={}", self.threads);
        s
    }

    /// The canonical serialization minus the run-environment keys (`out`,
    /// `threads`), which have no effect on artifact contents. This is what
    /// gets recorded next to the artifacts, so two runs of the same
    /// experiment match byte-for-byte wherever they are written.
    pub fn to_experiment_string(&self) -> String {
        self.to_config_string()
            .lines()
            .filter(|l| !l.starts_with("out=") && !l.starts_with("threads="))
            .map(|l| format!("{l}\n"))
            .collect()
    }

    /// Parses a config file body. Blank lines and `#` comments are ignored;
    /// later assignments win; unknown keys are errors naming the key.
    pub fn parse(body: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in body.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').with_context(|| {
                format!("line {}: expected key=value, got `{line}`", lineno + 1)
            })?;
            let (key, value) = (key.trim(), value.trim());
            cfg.set(key, value)
                .with_context(|| format!("line {}", lineno + 1))?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |reason: &str| anyhow::anyhow!("config key `{key}`: {reason} (got `{value}`)");
        match key {
            "form" => {
                self.form = if value == "delta" {
                    FormSelection::Delta
                } else if let Some(path) = value.strip_prefix("synthetic:") {
                    FormSelection::Synthetic(PathBuf::from(path))
                } else {
                    return Err(bad("expected `delta` or `synthetic:PATH`"));
                };
            }
            "x" => self.x = value.parse().map_err(|_| bad("expected an integer"))?,
            "y" => self.y = value.parse().map_err(|_| bad("expected an integer"))?,
            "c0" => self.c0 = value.parse().map_err(|_| bad("expected an integer"))?,
            "c" => self.c = value.parse().map_err(|_| bad("expected a number"))?,
            "u" => self.u = value.parse().map_err(|_| bad("expected a number"))?,
            "x_grid" => self.x_grid = split_list(key, value)?,
            "u_grid" => self.u_grid = split_list(key, value)?,
            "step" => self.step = value.parse().map_err(|_| bad("expected a number"))?,
            "u_max" => self.u_max = value.parse().map_err(|_| bad("expected a number"))?,
            "q" => self.q = split_list(key, value)?,
            "bfree" => {
                self.bfree = if value == "squares" {
                    BFreeSelection::Squares
                } else if value == "form" {
                    BFreeSelection::Form
                } else if let Some(els) = value.strip_prefix("explicit:") {
                    BFreeSelection::Explicit(split_list(key, els)?)
                } else {
                    return Err(bad("expected `squares`, `form`, or `explicit:B1,B2,...`"));
                };
            }
            "residue" => self.residue = value.parse().map_err(|_| bad("expected an integer"))?,
            "modulus" => self.modulus = value.parse().map_err(|_| bad("expected an integer"))?,
            "out" => self.out = PathBuf::from(value),
            "seed" => self.seed = value.parse().map_err(|_| bad("expected an integer"))?,
            "threads" => self.threads = value.parse().map_err(|_| bad("expected an integer"))?,
            _ => bail!("unknown config key `{key}`"),
        }
        Ok(())
    }

    /// Resolves the form selection into an instance, reading the synthetic
    /// description file when one is named.
    pub fn build_instance(&self) -> Result<FormInstance> {
        match &self.form {
            FormSelection::Delta => Ok(FormInstance::default_delta()),
            FormSelection::Synthetic(path) => {
                let body = std::fs::read_to_string(path)
                    .with_context(|| format!("reading synthetic form file {}", path.display()))?;
                parse_synthetic(&body)
                    .with_context(|| format!("synthetic form file {}", path.display()))
            }
        }
    }
}

/// Synthetic form description: `key=value` lines.
///
/// Keys: `k` (half-integral weight is `k + 1/2`; lift weight is `2k`),
/// `level` (of the half-integral form, a multiple of 4), `t` (square-free
/// twist index), `chi` (`trivial` or `kronecker:D`), `lift_level`,
/// `fill` (`error`, `zero`, `one`, `unit-positive`, `deligne-max`), and any
/// number of `assign=p:VALUE` lines pinning exact lift eigenvalues.
fn parse_synthetic(body: &str) -> Result<FormInstance> {
    let mut k: u32 = 6;
    let mut level: u64 = 4;
    let mut t: u64 = 1;
    let mut chi = Character::Trivial;
    let mut lift_level: u64 = 1;
    let mut fill = FillRule::UnitPositive;
    let mut assigns: Vec<(u64, BigInt)> = Vec::new();

    for (lineno, raw) in body.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("line {}: expected key=value, got `{line}`", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |reason: &str| anyhow::anyhow!("key `{key}`: {reason} (got `{value}`)");
        match key {
            "k" => k = value.parse().map_err(|_| bad("expected an integer"))?,
            "level" => level = value.parse().map_err(|_| bad("expected an integer"))?,
            "t" => t = value.parse().map_err(|_| bad("expected an integer"))?,
            "chi" => {
                chi = if value == "trivial" {
                    Character::Trivial
                } else if let Some(d) = value.strip_prefix("kronecker:") {
                    Character::Kronecker(d.parse().map_err(|_| bad("bad discriminant"))?)
                } else {
                    return Err(bad("expected `trivial` or `kronecker:D`"));
                };
            }
            "lift_level" => lift_level = value.parse().map_err(|_| bad("expected an integer"))?,
            "fill" => {
                fill = match value {
                    "error" => FillRule::Error,
                    "zero" => FillRule::Zero,
                    "one" => FillRule::One,
                    "unit-positive" => FillRule::UnitPositive,
                    "deligne-max" => FillRule::DeligneMax,
                    _ => {
                        return Err(bad(
                            "expected error | zero | one | unit-positive | deligne-max",
                        ))
                    }
                };
            }
            "assign" => {
                let (p, c) = value
                    .split_once(':')
                    .ok_or_else(|| bad("expected p:VALUE"))?;
                let p: u64 = p.trim().parse().map_err(|_| bad("bad prime"))?;
                let c: BigInt = c.trim().parse().map_err(|_| bad("bad integer value"))?;
                assigns.push((p, c));
            }
            _ => bail!("unknown synthetic form key `{key}`"),
        }
    }

    let mut lift = SyntheticLift::new(2 * k, lift_level, fill)?;
    for (p, c) in assigns {
        lift.assign(p, c)?;
    }
    Ok(FormInstance::new(
        k,
        level,
        chi,
        t,
        LiftBackend::Synthetic(lift),
    )?)
}

/// Loads the config with precedence: defaults, then the file, then CLI
/// overrides, then the `HALFSIGN_OUT` environment variable.
pub fn load(
    file: Option<&Path>,
    out: Option<&Path>,
    threads: Option<usize>,
    seed: Option<u64>,
) -> Result<RunConfig> {
    let mut cfg = match file {
        Some(path) => {
            let body = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            RunConfig::parse(&body).with_context(|| format!("config {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(out) = out {
        cfg.out = out.to_path_buf();
    }
    if let Some(threads) = threads {
        cfg.threads = threads;
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Ok(env_out) = std::env::var("HALFSIGN_OUT") {
        if !env_out.is_empty() {
            cfg.out = PathBuf::from(env_out);
        }
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let text = cfg.to_config_string();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(text, back.to_config_string());
    }

    #[test]
    fn custom_values_round_trip() {
        let cfg = RunConfig {
            form: FormSelection::Synthetic(PathBuf::from("forms/test.form")),
            x: 777,
            c: 0.25,
            x_grid: vec![10, 20, 30],
            u_grid: vec![1.0, 1.125],
            q: vec![2, 3, 5],
            bfree: BFreeSelection::Explicit(vec![2, 9, 77]),
            out: PathBuf::from("artifacts/run1"),
            ..RunConfig::default()
        };
        let back = RunConfig::parse(&cfg.to_config_string()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn empty_lists_round_trip() {
        let cfg = RunConfig {
            x_grid: vec![],
            q: vec![],
            ..RunConfig::default()
        };
        let back = RunConfig::parse(&cfg.to_config_string()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn experiment_string_drops_environment_keys() {
        let a = RunConfig {
            out: PathBuf::from("here"),
            threads: 8,
            ..RunConfig::default()
        };
        let b = RunConfig {
            out: PathBuf::from("there"),
            ..RunConfig::default()
        };
        assert_eq!(a.to_experiment_string(), b.to_experiment_string());
        assert!(!a.to_experiment_string().contains("out="));
        let back = RunConfig::parse(&a.to_experiment_string()).unwrap();
        assert_eq!(back.x, a.x);
        assert_eq!(back.out, PathBuf::from("out"));
    }

    #[test]
    fn unknown_key_is_an_error_naming_the_key() {
        let err = RunConfig::parse("bogus=1\n").unwrap_err();
        assert!(format!("{err:#}").contains("bogus"));
    }

    #[test]
    fn bad_value_names_the_key() {
        let err = RunConfig::parse("x=notanumber\n").unwrap_err();
        assert!(format!("{err:#}").contains("`x`"));
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let cfg = RunConfig::parse("# comment\n\nx=5\n").unwrap();
        assert_eq!(cfg.x, 5);
    }

    #[test]
    fn synthetic_file_builds_an_instance() {
        let body = "k=6\nlevel=4\nt=1\nchi=trivial\nfill=unit-positive\nassign=11:161051\n";
        let inst = parse_synthetic(body).unwrap();
        assert_eq!(inst.k(), 6);
        assert_eq!(inst.level(), 4);
    }

    #[test]
    fn synthetic_rejects_unknown_key() {
        assert!(parse_synthetic("weight=12\n").is_err());
    }
}
