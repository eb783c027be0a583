//! Run configuration: a strict `key = value` file with `[section]` headers.
//!
//! ```text
//! [model]
//! gamma_deph_per_ps = 9.1
//! clock = published
//!
//! [run]
//! experiment = dephasing-sweep
//! initial_state = mix16
//! sites = 1, 2, 5, 6
//! ```
//!
//! Keys before the first header belong to `[run]`. Unknown sections, unknown
//! keys, duplicates and out-of-range values are errors that name the line.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use lgfmo_core::experiments::ROOM_TEMPERATURE_GAMMA;
use lgfmo_core::fmo::{DEFAULT_RECOMBINATION_CM, DEFAULT_SINK_CM};
use lgfmo_core::{Clock, InitialState, PatternChoice, NUM_SITES};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    CoherentScan,
    Table2,
    DephasingSweep,
    Robustness,
    TrappingVariants,
    Propagate,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::CoherentScan,
        Experiment::Table2,
        Experiment::DephasingSweep,
        Experiment::Robustness,
        Experiment::TrappingVariants,
        Experiment::Propagate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::CoherentScan => "coherent-scan",
            Experiment::Table2 => "table2",
            Experiment::DephasingSweep => "dephasing-sweep",
            Experiment::Robustness => "robustness",
            Experiment::TrappingVariants => "trapping-variants",
            Experiment::Propagate => "propagate",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Measurement-interval grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    /// `k·0.001/c` ps, the grid behind the reference table.
    Published,
    /// `n` evenly spaced points up to 5 ps.
    Uniform(usize),
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::Published => f.write_str("published"),
            GridSpec::Uniform(n) => write!(f, "{n}"),
        }
    }
}

/// Where the per-(state, site) measurement interval of noisy runs comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtSource {
    /// Our own strongest-violation search on the configured grid.
    Reproduced,
    /// The printed reference values.
    Published,
}

impl fmt::Display for DtSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DtSource::Reproduced => "reproduced",
            DtSource::Published => "published",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // [model]
    pub hamiltonian: Option<PathBuf>,
    pub gamma_deph_per_ps: f64,
    pub gamma_sink_cm: f64,
    pub gamma_recomb_cm: f64,
    pub clock: Clock,
    // [run]
    pub experiment: Option<Experiment>,
    pub initial_state: InitialState,
    pub sites: Vec<usize>,
    pub pattern: PatternChoice,
    pub seed: u64,
    pub trials: usize,
    pub sigma2: f64,
    pub out: PathBuf,
    // [grid]
    pub dt_grid: GridSpec,
    pub dt_source: DtSource,
    pub gamma_max: f64,
    pub gamma_step: f64,
    pub room_gamma: f64,
    pub t_max: f64,
    pub step: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            hamiltonian: None,
            gamma_deph_per_ps: 0.0,
            gamma_sink_cm: DEFAULT_SINK_CM,
            gamma_recomb_cm: DEFAULT_RECOMBINATION_CM,
            clock: Clock::Published,
            experiment: None,
            initial_state: InitialState::Mixture16,
            sites: (1..=NUM_SITES).collect(),
            pattern: PatternChoice::default(),
            seed: 0,
            trials: 10,
            sigma2: 2.0,
            out: PathBuf::from("out"),
            dt_grid: GridSpec::Published,
            dt_source: DtSource::Reproduced,
            gamma_max: 12.0,
            gamma_step: 0.1,
            room_gamma: ROOM_TEMPERATURE_GAMMA,
            t_max: 5.0,
            step: 0.01,
        }
    }
}

fn nonnegative(v: f64) -> Result<f64, String> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be a nonnegative number, got {v}"))
    }
}

fn positive(v: f64) -> Result<f64, String> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn number<T: FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("`{v}` is not a valid number"))
}

fn parse_sites(v: &str) -> Result<Vec<usize>, String> {
    let sites: Vec<usize> = v.split(',').map(|s| number(s.trim())).collect::<Result<_, _>>()?;
    if sites.iter().any(|&m| !(1..=NUM_SITES).contains(&m)) {
        return Err(format!("sites must lie in 1..={NUM_SITES}"));
    }
    if sites.windows(2).any(|w| w[0] >= w[1]) {
        return Err("sites must be strictly ascending".into());
    }
    Ok(sites)
}

impl RunConfig {
    fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), String> {
        match (section, key) {
            ("model", "hamiltonian") => self.hamiltonian = Some(PathBuf::from(value)),
            ("model", "gamma_deph_per_ps") => self.gamma_deph_per_ps = nonnegative(number(value)?)?,
            ("model", "gamma_sink_cm") => self.gamma_sink_cm = nonnegative(number(value)?)?,
            ("model", "gamma_recomb_cm") => self.gamma_recomb_cm = nonnegative(number(value)?)?,
            ("model", "clock") => self.clock = Clock::parse(value).ok_or_else(|| format!("unknown clock `{value}`"))?,
            ("run", "experiment") => self.experiment = Some(value.parse()?),
            ("run", "initial_state") => self.initial_state = InitialState::parse(value).map_err(|e| e.to_string())?,
            ("run", "sites") => self.sites = parse_sites(value)?,
            ("run", "pattern") => {
                self.pattern = PatternChoice::parse(value).ok_or_else(|| format!("unknown pattern `{value}`"))?
            }
            ("run", "seed") => self.seed = number(value)?,
            ("run", "trials") => {
                self.trials = number(value)?;
                if self.trials == 0 {
                    return Err("trials must be at least 1".into());
                }
            }
            ("run", "sigma2") => self.sigma2 = nonnegative(number(value)?)?,
            ("run", "out") => self.out = PathBuf::from(value),
            ("grid", "dt_grid") => {
                self.dt_grid = match value {
                    "published" => GridSpec::Published,
                    n => match number::<usize>(n)? {
                        0 => return Err("dt_grid needs at least one point".into()),
                        n => GridSpec::Uniform(n),
                    },
                }
            }
            ("grid", "dt_source") => {
                self.dt_source = match value {
                    "reproduced" => DtSource::Reproduced,
                    "published" => DtSource::Published,
                    _ => return Err(format!("dt_source must be `reproduced` or `published`, got `{value}`")),
                }
            }
            ("grid", "gamma_max") => self.gamma_max = nonnegative(number(value)?)?,
            ("grid", "gamma_step") => self.gamma_step = positive(number(value)?)?,
            ("grid", "room_gamma") => self.room_gamma = nonnegative(number(value)?)?,
            ("grid", "t_max") => self.t_max = nonnegative(number(value)?)?,
            ("grid", "step") => self.step = positive(number(value)?)?,
            _ => return Err(format!("unknown key `{key}` in [{section}]")),
        }
        Ok(())
    }

    /// Inverse of [`parse_config`].
    pub fn render(&self) -> String {
        let mut s = String::from("[model]\n");
        if let Some(h) = &self.hamiltonian {
            writeln!(s, "hamiltonian = {}", h.display()).unwrap();
        }
        writeln!(s, "gamma_deph_per_ps = {}", self.gamma_deph_per_ps).unwrap();
        writeln!(s, "gamma_sink_cm = {}", self.gamma_sink_cm).unwrap();
        writeln!(s, "gamma_recomb_cm = {}", self.gamma_recomb_cm).unwrap();
        writeln!(s, "clock = {}", self.clock.name()).unwrap();
        s.push_str("\n[run]\n");
        if let Some(e) = self.experiment {
            writeln!(s, "experiment = {e}").unwrap();
        }
        writeln!(s, "initial_state = {}", self.initial_state).unwrap();
        let sites: Vec<String> = self.sites.iter().map(|m| m.to_string()).collect();
        writeln!(s, "sites = {}", sites.join(", ")).unwrap();
        writeln!(s, "pattern = {}", self.pattern).unwrap();
        writeln!(s, "seed = {}", self.seed).unwrap();
        writeln!(s, "trials = {}", self.trials).unwrap();
        writeln!(s, "sigma2 = {}", self.sigma2).unwrap();
        writeln!(s, "out = {}", self.out.display()).unwrap();
        s.push_str("\n[grid]\n");
        writeln!(s, "dt_grid = {}", self.dt_grid).unwrap();
        writeln!(s, "dt_source = {}", self.dt_source).unwrap();
        writeln!(s, "gamma_max = {}", self.gamma_max).unwrap();
        writeln!(s, "gamma_step = {}", self.gamma_step).unwrap();
        writeln!(s, "room_gamma = {}", self.room_gamma).unwrap();
        writeln!(s, "t_max = {}", self.t_max).unwrap();
        writeln!(s, "step = {}", self.step).unwrap();
        s
    }
}

const SECTIONS: [&str; 3] = ["model", "run", "grid"];

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut config = RunConfig::default();
    let mut section = "run".to_string();
    let mut seen = std::collections::HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| ConfigError { line, message };
        let content = raw.split_once('#').map_or(raw, |(c, _)| c).trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| err(format!("malformed section header `{content}`")))?;
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(err(format!("unknown section [{name}]")));
            }
            section = name.to_string();
            continue;
        }
        let (key, value) =
            content.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(err(format!("expected `key = value`, got `{content}`")));
        }
        if !seen.insert((section.clone(), key.to_string())) {
            return Err(err(format!("duplicate key `{key}` in [{section}]")));
        }
        config.set(&section, key, value).map_err(|m| err(format!("{key}: {m}")))?;
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_config_is_all_defaults() {
        assert_eq!(parse_config("").unwrap(), RunConfig::default());
        assert_eq!(parse_config("# nothing\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn negative_rate_names_line() {
        let e = parse_config("[model]\n\ngamma_deph_per_ps = -1\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("gamma_deph_per_ps"));
    }

    #[test]
    fn initial_state_mix16() {
        let c = parse_config("initial_state = mix16").unwrap();
        assert_eq!(c.initial_state, InitialState::Mixture16);
        let c = parse_config("initial_state = site6").unwrap();
        assert_eq!(c.initial_state, InitialState::PureSite(6));
    }

    #[test]
    fn strictness() {
        assert_eq!(parse_config("[run]\nbogus = 1").unwrap_err().line, 2);
        assert_eq!(parse_config("[physics]").unwrap_err().line, 1);
        assert_eq!(parse_config("seed = 1\nseed = 2").unwrap_err().line, 2);
        assert_eq!(parse_config("seed").unwrap_err().line, 1);
        assert_eq!(parse_config("[model]\nseed = 1").unwrap_err().line, 2);
        assert!(parse_config("sites = 3, 1").is_err());
        assert!(parse_config("sites = 0").is_err());
        assert!(parse_config("[grid]\nstep = 0").is_err());
        assert!(parse_config("[grid]\ndt_grid = 0").is_err());
        assert!(parse_config("experiment = table3").is_err());
        assert!(parse_config("trials = 0").is_err());
    }

    #[test]
    fn comments_and_sections() {
        let c = parse_config("experiment = robustness # trailing\n[grid]\ndt_grid = 1500\n[model]\nclock = angular")
            .unwrap();
        assert_eq!(c.experiment, Some(Experiment::Robustness));
        assert_eq!(c.dt_grid, GridSpec::Uniform(1500));
        assert_eq!(c.clock, Clock::Angular);
    }

    fn arb_config() -> impl Strategy<Value = RunConfig> {
        (
            (0.0f64..20.0, 0.0f64..100.0, 0.0f64..1.0, any::<bool>(), proptest::option::of(0usize..6)),
            (
                prop_oneof![
                    Just(InitialState::Mixture16),
                    Just(InitialState::MaximallyMixed7),
                    (1usize..=7).prop_map(InitialState::PureSite)
                ],
                proptest::sample::subsequence((1..=NUM_SITES).collect::<Vec<_>>(), 1..=NUM_SITES),
                0usize..5,
                any::<u64>(),
                1usize..50,
                0.0f64..5.0,
            ),
            (proptest::option::of(1usize..3000), any::<bool>(), 0.0f64..20.0, 1e-3f64..1.0, 0.0f64..10.0, 1e-3f64..1.0),
        )
            .prop_map(
                |(
                    (deph, sink, recomb, angular, exp),
                    (init, sites, pat, seed, trials, sigma2),
                    (grid, published, gmax, gstep, tmax, step),
                )| {
                    let patterns = ["base", "flip1", "flip2", "flip3", "min"];
                    RunConfig {
                        hamiltonian: None,
                        gamma_deph_per_ps: deph,
                        gamma_sink_cm: sink,
                        gamma_recomb_cm: recomb,
                        clock: if angular { Clock::Angular } else { Clock::Published },
                        experiment: exp.map(|i| Experiment::ALL[i]),
                        initial_state: init,
                        sites,
                        pattern: PatternChoice::parse(patterns[pat]).unwrap(),
                        seed,
                        trials,
                        sigma2,
                        out: PathBuf::from("results/run"),
                        dt_grid: grid.map_or(GridSpec::Published, GridSpec::Uniform),
                        dt_source: if published { DtSource::Published } else { DtSource::Reproduced },
                        gamma_max: gmax,
                        gamma_step: gstep,
                        room_gamma: ROOM_TEMPERATURE_GAMMA,
                        t_max: tmax,
                        step,
                    }
                },
            )
    }

    proptest! {
        #[test]
        fn render_round_trips(c in arb_config()) {
            prop_assert_eq!(parse_config(&c.render()).unwrap(), c);
        }
    }
}
