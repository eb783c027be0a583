use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use lgfmo_core::experiments::{
    gamma_grid, population_trajectory, run_coherent_scan, run_dephasing_sweep, run_robustness, run_table2,
    run_trapping_variants, site_observables, write_csv, write_trajectory_csv, RobustnessSummary, SweepRecord,
    TemperatureAnchor, TrappingRate, NOISY_INITIAL_STATES, TABLE2_INITIAL_STATES, TEMPERATURE_ANCHORS,
};
use lgfmo_core::{build_default_model, DtGrid, DtTable, Hamiltonian7, InitialState, LindbladModel, NUM_SITES};
use serde::Serialize;

use crate::config::{ConfigError, DtSource, Experiment, GridSpec, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Config { path: PathBuf, source: ConfigError },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Core(#[from] lgfmo_core::Error),
}

impl CliError {
    /// 1 for configuration and I/O problems, 2 for numerical-consistency
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

/// Files written by one run.
#[derive(Debug, Clone)]
pub struct Output {
    pub csv: PathBuf,
    pub metadata: PathBuf,
    pub rows: usize,
}

/// Seven rows of seven numbers (cm⁻¹), separated by whitespace or commas.
/// `#` starts a comment.
pub fn load_hamiltonian(path: &Path) -> Result<Hamiltonian7, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |line: usize, message: String| CliError::Config {
        path: path.to_path_buf(),
        source: ConfigError { line, message },
    };
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split_once('#').map_or(raw, |(c, _)| c).trim();
        if content.is_empty() {
            continue;
        }
        let row: Vec<f64> = content
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| bad(i + 1, format!("`{s}` is not a number"))))
            .collect::<Result<_, _>>()?;
        if row.len() != NUM_SITES {
            return Err(bad(i + 1, format!("expected {NUM_SITES} entries, found {}", row.len())));
        }
        rows.push((i + 1, row));
    }
    if rows.len() != NUM_SITES {
        return Err(bad(rows.last().map_or(1, |r| r.0), format!("expected {NUM_SITES} rows, found {}", rows.len())));
    }
    let mut entries = [[0.0; NUM_SITES]; NUM_SITES];
    for (dst, (_, src)) in entries.iter_mut().zip(&rows) {
        dst.copy_from_slice(src);
    }
    Hamiltonian7::new(entries).map_err(|e| bad(rows[0].0, e.to_string()))
}

fn build_model(config: &RunConfig) -> Result<LindbladModel, CliError> {
    let mut model = build_default_model()
        .with_clock(config.clock)
        .with_dephasing(config.gamma_deph_per_ps)?
        .with_sink_wavenumber(config.gamma_sink_cm)?
        .with_recombination_wavenumber(config.gamma_recomb_cm)?;
    if let Some(path) = &config.hamiltonian {
        model = model.with_hamiltonian(load_hamiltonian(path)?);
    }
    Ok(model)
}

fn dt_grid(config: &RunConfig) -> Result<DtGrid, CliError> {
    Ok(match config.dt_grid {
        GridSpec::Published => DtGrid::published(),
        GridSpec::Uniform(n) => DtGrid::uniform(n, lgfmo_core::leggett_garg::MAX_DT_PS)?,
    })
}

fn dt_table(config: &RunConfig, model: &LindbladModel) -> Result<DtTable, CliError> {
    Ok(match config.dt_source {
        DtSource::Published => DtTable::published(),
        DtSource::Reproduced => {
            let rows = run_table2(model, &NOISY_INITIAL_STATES, &dt_grid(config)?, config.pattern)?;
            DtTable::from_table2(&rows)
        }
    })
}

#[derive(Debug, Serialize)]
struct ModelMetadata {
    clock: &'static str,
    hamiltonian_cm: [[f64; NUM_SITES]; NUM_SITES],
    hamiltonian_source: String,
    gamma_deph_per_ps: f64,
    gamma_sink_per_ps: f64,
    gamma_recomb_per_ps: f64,
    generator_sink_rate: f64,
    generator_recombination_rate: f64,
    generator_dephasing_rate: f64,
}

#[derive(Debug, Serialize)]
struct GridMetadata {
    kind: String,
    points: usize,
    first_ps: f64,
    last_ps: f64,
}

#[derive(Debug, Serialize)]
struct Metadata {
    tool: &'static str,
    version: &'static str,
    experiment: &'static str,
    csv: String,
    rows: usize,
    config: String,
    model: ModelMetadata,
    pattern: String,
    pattern_convention: &'static str,
    seed: u64,
    dt_grid: GridMetadata,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt_table: Option<BTreeMap<String, f64>>,
    published_dt_table: BTreeMap<String, f64>,
    temperature_anchors: [TemperatureAnchor; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    robustness: Option<Vec<RobustnessSummary>>,
}

const PATTERN_CONVENTION: &str =
    "K = s12*C12 + s23*C23 + s13*C13 + 1; base (+,+,+), flip1 (-,+,-), flip2 (-,-,+), flip3 (+,-,-); min takes the pointwise minimum";

enum Rows {
    Sweep(Vec<SweepRecord>),
    Trajectory(Vec<(f64, Vec<f64>)>),
}

impl Rows {
    fn len(&self) -> usize {
        match self {
            Rows::Sweep(r) => r.len(),
            Rows::Trajectory(r) => r.len(),
        }
    }
}

/// Runs `experiment` and writes `<out>/<experiment>.csv` plus a
/// `<experiment>.meta.json` sidecar.
pub fn execute(config: &RunConfig) -> Result<Output, CliError> {
    let experiment = config.experiment.ok_or_else(|| {
        CliError::Usage("no experiment given; pass a subcommand or set `experiment` in the config".into())
    })?;
    let model = build_model(config)?;
    let grid = dt_grid(config)?;
    let mut gammas = None;
    let mut table = None;
    let mut robustness = None;

    let rows = match experiment {
        Experiment::CoherentScan => {
            let q = site_observables(&config.sites, NUM_SITES)?;
            Rows::Sweep(run_coherent_scan(&model, config.initial_state, &q, &grid, config.pattern)?)
        }
        Experiment::Table2 => {
            let rows = run_table2(&model, &TABLE2_INITIAL_STATES, &grid, config.pattern)?;
            Rows::Sweep(rows.iter().map(|r| r.to_record()).collect())
        }
        Experiment::DephasingSweep => {
            if config.initial_state == InitialState::MaximallyMixed7 {
                return Err(CliError::Usage("dephasing-sweep does not accept initial_state = maxmix7".into()));
            }
            let g = gamma_grid(config.gamma_max, config.gamma_step)?;
            let dts = dt_table(config, &model)?;
            let records = run_dephasing_sweep(&model, config.initial_state, &config.sites, &g, &dts, config.pattern)?;
            gammas = Some(g);
            table = Some(dts);
            Rows::Sweep(records)
        }
        Experiment::Robustness => {
            let dts = dt_table(config, &model)?;
            let report = run_robustness(
                &model,
                config.trials,
                config.sigma2,
                config.seed,
                config.room_gamma,
                &dts,
                config.pattern,
            )?;
            table = Some(dts);
            robustness = Some(report.summary);
            Rows::Sweep(report.records)
        }
        Experiment::TrappingVariants => {
            let dts = dt_table(config, &model)?;
            let records =
                run_trapping_variants(&model, &TrappingRate::LITERATURE, config.room_gamma, &dts, config.pattern)?;
            table = Some(dts);
            Rows::Sweep(records)
        }
        Experiment::Propagate => {
            Rows::Trajectory(population_trajectory(&model, config.initial_state, config.t_max, config.step)?)
        }
    };

    fs::create_dir_all(&config.out).map_err(|e| CliError::io(&config.out, e))?;
    let csv_name = format!("{experiment}.csv");
    let csv = config.out.join(&csv_name);
    write_file(&csv, |w| match &rows {
        Rows::Sweep(r) => write_csv(r, w),
        Rows::Trajectory(r) => write_trajectory_csv(r, w),
    })?;

    let points = grid.points();
    let metadata = Metadata {
        tool: "lgfmo",
        version: env!("CARGO_PKG_VERSION"),
        experiment: experiment.name(),
        csv: csv_name,
        rows: rows.len(),
        config: config.render(),
        model: ModelMetadata {
            clock: model.clock().name(),
            hamiltonian_cm: *model.hamiltonian().entries(),
            hamiltonian_source: config
                .hamiltonian
                .as_ref()
                .map_or_else(|| "default".into(), |p| p.display().to_string()),
            gamma_deph_per_ps: config.gamma_deph_per_ps,
            gamma_sink_per_ps: model.gamma_sink().value(),
            gamma_recomb_per_ps: model.gamma_recomb()[0].value(),
            generator_sink_rate: model.generator_sink_rate(),
            generator_recombination_rate: model.generator_recombination_rates()[0],
            generator_dephasing_rate: model.generator_dephasing_rates()[0],
        },
        pattern: config.pattern.to_string(),
        pattern_convention: PATTERN_CONVENTION,
        seed: config.seed,
        dt_grid: GridMetadata {
            kind: config.dt_grid.to_string(),
            points: points.len(),
            first_ps: points[0],
            last_ps: points[points.len() - 1],
        },
        gamma_grid: gammas,
        dt_table: table.map(|t| t.entries().clone()),
        published_dt_table: DtTable::published().entries().clone(),
        temperature_anchors: TEMPERATURE_ANCHORS,
        robustness,
    };
    let meta = config.out.join(format!("{experiment}.meta.json"));
    write_file(&meta, |w| {
        serde_json::to_writer_pretty(&mut *w, &metadata).map_err(io::Error::other)?;
        writeln!(w)
    })?;
    Ok(Output { csv, metadata: meta, rows: rows.len() })
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}
