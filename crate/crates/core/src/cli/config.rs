//! Flat `key = value` run configuration.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! # comment (also allowed after a value)
//! key = value
//! ```
//!
//! Keys are identifiers, values run to the end of the line (or to `#`) and are
//! trimmed. A key may appear once per file; command-line overrides given as
//! `key=value` replace file entries. Unknown keys are rejected so that typos
//! cannot silently fall back to defaults. Relative paths resolve against the
//! directory of the configuration file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::control::NabokoOptions;
use crate::criteria::{default_lambda_grid, default_time_grid};
use crate::error::{Result, SimError};
use crate::gallery::{
    bhat_skeide, bhat_suite, law_suite, lemerdy_semigroup, packel_nilpotent_default,
    packel_semigroup, packel_suite, riemann_liouville_semigroup, w_semigroup, w_suite,
    DyadicSequence, GridSpace, IndexSet, LeMerdyBasis, SuiteReport,
};
use crate::opcore::linalg::{from_real_rows, ComplexMatrix};
use crate::opcore::semigroup::MatrixSemigroup;
use crate::weightsolve::SolverOptions;

/// The six subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Constant,
    Classify,
    Gallery,
    Audit,
    Observe,
    Naboko,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Constant => "constant",
            Command::Classify => "classify",
            Command::Gallery => "gallery",
            Command::Audit => "audit",
            Command::Observe => "observe",
            Command::Naboko => "naboko",
        }
    }
}

/// Which constant `constant` computes for a matrix input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// `C(T)` of a single operator.
    Discrete,
    /// `𝒞` of the semigroup generated by the input.
    Joint,
    /// Constant of `e^{-λt}e^{tA}` at `shift = λ`.
    Quasi,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Discrete => "discrete",
            Mode::Joint => "joint",
            Mode::Quasi => "quasi",
        }
    }
}

/// Gramian horizon requested by `observe`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HorizonSpec {
    Finite(f64),
    Infinite,
}

/// A named gallery construction with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum GallerySpec {
    W {
        m: usize,
    },
    Packel {
        index_set: IndexSet,
        window: u32,
        base: f64,
        x: Option<f64>,
        m: Option<usize>,
    },
    PackelNilpotent {
        window: u32,
    },
    BhatSkeide {
        t: ComplexMatrix,
        m: usize,
    },
    RiemannLiouville {
        m: usize,
        order_step: f64,
    },
    LeMerdy {
        n: usize,
    },
}

impl GallerySpec {
    fn packel_sequence(index_set: IndexSet, window: u32, base: f64) -> Result<DyadicSequence> {
        DyadicSequence::geometric(index_set, window, base)
    }

    /// Truncation `[0, X]` and cell count; defaults put the smallest `a_n` on one cell.
    fn packel_space(a: &DyadicSequence, x: Option<f64>, m: Option<usize>) -> Result<GridSpace> {
        let x = x.unwrap_or_else(|| a.max());
        let m = m.unwrap_or_else(|| (x / a.values[0]).round().max(1.0) as usize);
        GridSpace::new(x, m, 0.0)
    }

    /// Label and semigroup of the construction.
    pub fn build(&self) -> Result<(String, MatrixSemigroup)> {
        Ok(match self {
            GallerySpec::W { m } => (format!("w_semigroup m={m}"), w_semigroup(*m, None)?),
            GallerySpec::Packel {
                index_set,
                window,
                base,
                x,
                m,
            } => {
                let a = Self::packel_sequence(*index_set, *window, *base)?;
                let space = Self::packel_space(&a, *x, *m)?;
                (
                    format!(
                        "packel {index_set:?} window={window} X={} m={}",
                        space.nu, space.m
                    ),
                    packel_semigroup(&a, &space)?,
                )
            }
            GallerySpec::PackelNilpotent { window } => (
                format!("packel_nilpotent window={window}"),
                packel_nilpotent_default(*window)?,
            ),
            GallerySpec::BhatSkeide { t, m } => (
                format!("bhat_skeide d={} m={m}", t.nrows()),
                bhat_skeide(t, *m)?,
            ),
            GallerySpec::RiemannLiouville { m, order_step } => (
                format!("riemann_liouville m={m} order_step={order_step}"),
                riemann_liouville_semigroup(&GridSpace::new(1.0, *m, 0.0)?, *order_step)?,
            ),
            GallerySpec::LeMerdy { n } => (
                format!("lemerdy n={n}"),
                lemerdy_semigroup(*n, &LeMerdyBasis::SummingSections)?,
            ),
        })
    }

    /// Truncation family ending in the configured construction.
    ///
    /// Windowed constructions grow the window from one; the Packel family keeps
    /// the grid of the largest window so that every member is a compression of
    /// the same space. Other constructions form a one-member family.
    pub fn family(&self) -> Result<Vec<(String, MatrixSemigroup)>> {
        match self {
            GallerySpec::Packel {
                index_set,
                window,
                base,
                x,
                m,
            } => {
                let top = Self::packel_sequence(*index_set, *window, *base)?;
                let space = Self::packel_space(&top, *x, *m)?;
                (1..=*window)
                    .map(|k| {
                        let a = Self::packel_sequence(*index_set, k, *base)?;
                        Ok((format!("window={k}"), packel_semigroup(&a, &space)?))
                    })
                    .collect()
            }
            GallerySpec::PackelNilpotent { window } => (1..=*window)
                .map(|k| Ok((format!("window={k}"), packel_nilpotent_default(k)?)))
                .collect(),
            GallerySpec::LeMerdy { n } => (1..=*n)
                .map(|k| {
                    Ok((
                        format!("n={k}"),
                        lemerdy_semigroup(k, &LeMerdyBasis::SummingSections)?,
                    ))
                })
                .collect(),
            _ => Ok(vec![self.build()?]),
        }
    }

    /// The construction's identity suite.
    pub fn suite(&self) -> Result<SuiteReport> {
        match self {
            GallerySpec::W { m } => Ok(w_suite(*m)),
            GallerySpec::Packel {
                index_set,
                window,
                base,
                x,
                m,
            } => {
                let a = Self::packel_sequence(*index_set, *window, *base)?;
                packel_suite(&a, &Self::packel_space(&a, *x, *m)?)
            }
            GallerySpec::PackelNilpotent { window } => {
                let a = Self::packel_sequence(IndexSet::Zminus, *window, 2.0)?;
                packel_suite(&a, &GridSpace::new(1.0, 1 << window, 0.0)?)
            }
            GallerySpec::BhatSkeide { t, m } => Ok(bhat_suite(t, *m)),
            GallerySpec::RiemannLiouville { .. } | GallerySpec::LeMerdy { .. } => {
                let (label, sem) = self.build()?;
                law_suite(&label, &sem, 8, 8)
            }
        }
    }
}

/// Everything a command needs, validated.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    /// Matrix JSON input (`constant`, `classify`, `audit`), as written in the configuration.
    pub input: Option<String>,
    /// System JSON input (`observe`, `naboko`), as written in the configuration.
    pub system: Option<String>,
    pub base_dir: PathBuf,
    pub mode: Mode,
    pub shift: f64,
    pub gallery: Option<GallerySpec>,
    pub solver: SolverOptions,
    pub t_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub eps_grid: Vec<f64>,
    pub sample_times: Vec<f64>,
    /// `τ` of the bound audit and of finite-horizon Gramians.
    pub tau: f64,
    /// `λ` of the bound audit.
    pub lambda: f64,
    /// Truncation `N` of the Holbrook factorisation.
    pub holbrook_horizon: usize,
    pub horizon: HorizonSpec,
    pub naboko: NabokoOptions,
    pub out: PathBuf,
}

/// Parses the text of a configuration file into raw entries.
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) =
            parse_pair(line).map_err(|e| SimError::Parse(format!("line {}: {e}", no + 1)))?;
        if out.insert(k.clone(), v).is_some() {
            return Err(SimError::Parse(format!(
                "line {}: duplicate key {k:?}",
                no + 1
            )));
        }
    }
    Ok(out)
}

fn parse_pair(s: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key = value, found {s:?}"))?;
    let k = k.trim();
    let valid = k
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !valid {
        return Err(format!("invalid key {k:?}"));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

/// Entries still to be consumed; leftovers are unknown keys.
struct Entries(BTreeMap<String, String>);

impl Entries {
    fn take(&mut self, key: &str) -> Option<String> {
        self.0.remove(key)
    }

    fn num<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        self.take(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| SimError::Parse(format!("{key}: cannot parse {v:?}")))
            })
            .transpose()
    }

    fn positive(&mut self, key: &str, default: f64) -> Result<f64> {
        let v = self.num::<f64>(key)?.unwrap_or(default);
        if !(v > 0.0) || !v.is_finite() {
            return Err(SimError::Parse(format!(
                "{key} must be positive and finite, got {v}"
            )));
        }
        Ok(v)
    }

    fn count(&mut self, key: &str, default: usize) -> Result<usize> {
        let v = self.num::<usize>(key)?.unwrap_or(default);
        if v == 0 {
            return Err(SimError::Parse(format!("{key} must be at least 1")));
        }
        Ok(v)
    }

    fn grid(&mut self, key: &str, default: Vec<f64>) -> Result<Vec<f64>> {
        let Some(v) = self.take(key) else {
            return Ok(default);
        };
        let grid = v
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| SimError::Parse(format!("{key}: cannot parse {x:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if grid.is_empty() || grid.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(SimError::Parse(format!(
                "{key} must list positive finite numbers"
            )));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SimError::Parse(format!(
                "{key} must be strictly increasing"
            )));
        }
        Ok(grid)
    }

    fn finish(self) -> Result<()> {
        match self.0.keys().next() {
            Some(k) => Err(SimError::Parse(format!("unknown key {k:?}"))),
            None => Ok(()),
        }
    }
}

/// Inline real matrix: rows separated by `;`, entries by `,` (e.g. `0,1;0,0`).
pub fn parse_inline_matrix(s: &str) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<f64>> = s
        .split(';')
        .map(|r| {
            r.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| SimError::Parse(format!("matrix entry {x:?}")))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(SimError::Parse(format!(
            "inline matrix {s:?} is not square"
        )));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(SimError::Parse(format!(
            "inline matrix {s:?} has non-finite entries"
        )));
    }
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    Ok(from_real_rows(&refs))
}

fn gallery_spec(e: &mut Entries) -> Result<Option<GallerySpec>> {
    let Some(kind) = e.take("kind") else {
        return Ok(None);
    };
    let window = |e: &mut Entries, d: u32| -> Result<u32> {
        let w = e.num::<u32>("window")?.unwrap_or(d);
        if w == 0 || w > 12 {
            return Err(SimError::Parse(format!(
                "window must lie in 1..=12, got {w}"
            )));
        }
        Ok(w)
    };
    let spec = match kind.as_str() {
        "w_semigroup" => GallerySpec::W {
            m: e.count("m", 64)?,
        },
        "packel" => {
            let index_set = IndexSet::parse(&e.take("J").unwrap_or_else(|| "Zminus".into()))?;
            let window = window(e, 4)?;
            let base = e.positive("base", 2.0)?;
            let x = e.num::<f64>("X")?;
            let m = e.num::<usize>("m")?;
            GallerySpec::Packel {
                index_set,
                window,
                base,
                x,
                m,
            }
        }
        "packel_nilpotent" => GallerySpec::PackelNilpotent {
            window: window(e, 3)?,
        },
        "bhat_skeide" => {
            let t = parse_inline_matrix(
                &e.take("T")
                    .ok_or_else(|| SimError::Parse("bhat_skeide needs T".into()))?,
            )?;
            GallerySpec::BhatSkeide {
                t,
                m: e.count("m", 64)?,
            }
        }
        "riemann_liouville" => GallerySpec::RiemannLiouville {
            m: e.count("m", 64)?,
            order_step: e.positive("order_step", 0.25)?,
        },
        "lemerdy" => GallerySpec::LeMerdy {
            n: e.count("n", 4)?,
        },
        other => return Err(SimError::Parse(format!("unknown gallery kind {other:?}"))),
    };
    Ok(Some(spec))
}

impl RunConfig {
    /// Reads `path`, applies `overrides` (`key=value`) and validates.
    pub fn load(
        command: Command,
        path: &Path,
        overrides: &[String],
        out: Option<&Path>,
    ) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        let mut entries = parse_entries(&text)?;
        for o in overrides {
            let (k, v) = parse_pair(o).map_err(|e| SimError::Parse(format!("override: {e}")))?;
            entries.insert(k, v);
        }
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_entries(command, entries, base_dir, out)
    }

    pub fn from_entries(
        command: Command,
        entries: BTreeMap<String, String>,
        base_dir: PathBuf,
        out: Option<&Path>,
    ) -> Result<Self> {
        let mut e = Entries(entries);
        let input = e.take("input");
        let system = e.take("system");
        let mode = match e.take("mode").as_deref() {
            None | Some("joint") => Mode::Joint,
            Some("discrete") => Mode::Discrete,
            Some("quasi") => Mode::Quasi,
            Some(other) => {
                return Err(SimError::Parse(format!(
                    "unknown mode {other:?} (expected discrete, joint or quasi)"
                )))
            }
        };
        let shift = e.num::<f64>("shift")?.unwrap_or(0.0);
        if !shift.is_finite() {
            return Err(SimError::Parse("shift must be finite".into()));
        }
        let gallery = gallery_spec(&mut e)?;

        let d = SolverOptions::default();
        let solver = SolverOptions {
            feas_tol: e.positive("feas_tol", d.feas_tol)?,
            rel_tol: e.positive("rel_tol", d.rel_tol)?,
            kappa_max: e.positive("kappa_max", d.kappa_max)?,
            max_iter: e.count("max_iter", d.max_iter)?,
            kappa_slack: e.positive("kappa_slack", d.kappa_slack)?,
        };
        let t_grid = e.grid("t_grid", default_time_grid())?;
        let lambda_grid = e.grid("lambda_grid", default_lambda_grid())?;
        let eps_grid = e.grid("eps_grid", vec![0.05, 0.1, 0.5])?;
        let sample_times = e.grid("sample_times", vec![1.0])?;
        let tau = e.positive("tau", 1.0)?;
        let lambda = e.positive("lambda", 1.0)?;
        let holbrook_horizon = e.count("holbrook_horizon", 8)?;
        let horizon = match e.take("horizon").as_deref() {
            None | Some("infinite") => HorizonSpec::Infinite,
            Some(v) => match v.parse::<f64>() {
                Ok(t) if t > 0.0 && t.is_finite() => HorizonSpec::Finite(t),
                _ => {
                    return Err(SimError::Parse(format!(
                        "horizon must be \"infinite\" or a positive number, got {v:?}"
                    )))
                }
            },
        };
        let nd = NabokoOptions::default();
        let naboko = NabokoOptions {
            xi_max: e.positive("xi_max", nd.xi_max)?,
            tol: e.positive("quad_tol", nd.tol)?,
            random_probes: e.num::<usize>("probes")?.unwrap_or(nd.random_probes),
            seed: e.num::<u64>("seed")?.unwrap_or(nd.seed),
            ..nd
        };
        let out_key = e.take("out");
        e.finish()?;
        let out = match (out, out_key) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(p)) => base_dir.join(p),
            (None, None) => PathBuf::from("out"),
        };

        let cfg = Self {
            command,
            input,
            system,
            base_dir,
            mode,
            shift,
            gallery,
            solver,
            t_grid,
            lambda_grid,
            eps_grid,
            sample_times,
            tau,
            lambda,
            holbrook_horizon,
            horizon,
            naboko,
            out,
        };
        cfg.check_inputs()?;
        Ok(cfg)
    }

    fn check_inputs(&self) -> Result<()> {
        let needs = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(SimError::Parse(format!(
                    "{} needs {what}",
                    self.command.as_str()
                )))
            }
        };
        match self.command {
            Command::Constant | Command::Classify | Command::Audit => needs(
                self.input.is_some() != self.gallery.is_some(),
                "exactly one of input = <matrix.json> or kind = <gallery>",
            ),
            Command::Gallery => needs(self.gallery.is_some(), "kind = <gallery construction>"),
            Command::Observe | Command::Naboko => {
                needs(self.system.is_some(), "system = <system.json>")
            }
        }
    }

    /// Resolves a configured path against the configuration directory.
    pub fn resolve(&self, p: &str) -> PathBuf {
        self.base_dir.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, command: Command) -> Result<RunConfig> {
        RunConfig::from_entries(command, parse_entries(text)?, PathBuf::new(), None)
    }

    #[test]
    fn grammar_comments_and_duplicates() {
        let e = parse_entries("# head\n\n input = a.json # trailing\nmode=discrete\n").unwrap();
        assert_eq!(e.get("input").unwrap(), "a.json");
        assert_eq!(e.get("mode").unwrap(), "discrete");
        assert!(parse_entries("a = 1\na = 2\n").is_err());
        assert!(parse_entries("no equals sign\n").is_err());
        assert!(parse_entries("1abc = 2\n").is_err());
    }

    #[test]
    fn validation() {
        assert!(load("input = a.json\nmode = discrete\n", Command::Constant).is_ok());
        assert!(load("input = a.json\nbogus = 1\n", Command::Constant).is_err());
        assert!(load("input = a.json\nt_grid = 1, 0.5\n", Command::Classify).is_err());
        assert!(load("input = a.json\nfeas_tol = -1\n", Command::Constant).is_err());
        assert!(load("mode = discrete\n", Command::Constant).is_err());
        assert!(load("kind = nonsense\n", Command::Gallery).is_err());
        let c = load("kind = bhat_skeide\nT = 0,1;0,0\nm = 8\n", Command::Gallery).unwrap();
        assert!(matches!(
            c.gallery,
            Some(GallerySpec::BhatSkeide { m: 8, .. })
        ));
        let c = load("system = s.json\nhorizon = 2.5\n", Command::Observe).unwrap();
        assert_eq!(c.horizon, HorizonSpec::Finite(2.5));
    }

    #[test]
    fn inline_matrices() {
        let m = parse_inline_matrix("1, 2; 3, 4").unwrap();
        assert_eq!(m[(1, 0)].re, 3.0);
        assert!(parse_inline_matrix("1,2;3").is_err());
        assert!(parse_inline_matrix("0.5").is_ok());
    }
}
