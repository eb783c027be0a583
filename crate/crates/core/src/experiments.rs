//! Drivers for the coherent scans, the strongest-violation table and the
//! dephasing sweeps. Every driver returns records in a fixed order, so
//! output does not depend on thread scheduling.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{StateLabel, FULL_DIM, NUM_SITES};
use crate::dynamics::{CoherentPropagator, Evolution, LindbladPropagator};
use crate::error::{Error, Result};
use crate::fmo::{perturb_hamiltonian, InitialState, LindbladModel};
use crate::leggett_garg::{find_strongest_violation, lg_protocol, DtGrid, LgResult, PatternChoice};
use crate::observable::{make_site_observable, DichotomicObservable};
use crate::state::DensityOperator;

pub const CSV_HEADER: &str = "experiment,initial_state,observable,gamma_per_ps,dt_ps,pattern,K,violation";

/// Room-temperature dephasing label, ps⁻¹.
pub const ROOM_TEMPERATURE_GAMMA: f64 = 9.1;

/// Initial states used once noise is switched on.
pub const NOISY_INITIAL_STATES: [InitialState; 3] =
    [InitialState::Mixture16, InitialState::PureSite(1), InitialState::PureSite(6)];

/// Initial states of the strongest-violation table.
pub const TABLE2_INITIAL_STATES: [InitialState; 4] =
    [InitialState::Mixture16, InitialState::PureSite(1), InitialState::PureSite(6), InitialState::MaximallyMixed7];

/// One row of experiment output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub experiment: String,
    pub initial_state: String,
    pub observable: String,
    pub gamma_per_ps: f64,
    pub dt_ps: f64,
    pub pattern: String,
    pub k: f64,
    pub violation: bool,
}

impl SweepRecord {
    pub fn from_result(experiment: &str, gamma_per_ps: f64, choice: PatternChoice, r: &LgResult) -> Self {
        let pattern = match choice {
            PatternChoice::Fixed(p) => p.to_string(),
            PatternChoice::Min => format!("min:{}", r.pattern),
        };
        SweepRecord {
            experiment: experiment.to_string(),
            initial_state: r.initial_state.clone(),
            observable: r.observable.to_string(),
            gamma_per_ps,
            dt_ps: r.dt(),
            pattern,
            k: r.k,
            violation: r.violation(),
        }
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.experiment,
            self.initial_state,
            self.observable,
            format_sig9(self.gamma_per_ps),
            format_sig9(self.dt_ps),
            self.pattern,
            format_sig9(self.k),
            self.violation
        )
    }
}

/// `%.9g`-style formatting: nine significant digits, trailing zeros trimmed.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Writes the header and one line per record, LF-terminated.
pub fn write_csv<W: Write>(records: &[SweepRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}

/// Published dephasing rates with an associated temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TemperatureAnchor {
    pub gamma_per_ps: f64,
    pub temperature_k: f64,
}

pub const TEMPERATURE_ANCHORS: [TemperatureAnchor; 2] = [
    TemperatureAnchor { gamma_per_ps: 2.1, temperature_k: 77.0 },
    TemperatureAnchor { gamma_per_ps: 9.1, temperature_k: 298.0 },
];

impl TemperatureAnchor {
    /// Exact lookup; there is no interpolation between anchors.
    pub fn for_gamma(gamma_per_ps: f64) -> Option<TemperatureAnchor> {
        TEMPERATURE_ANCHORS.iter().copied().find(|a| a.gamma_per_ps == gamma_per_ps)
    }
}

pub fn site_observables(sites: &[usize], dim: usize) -> Result<Vec<DichotomicObservable>> {
    sites.iter().map(|&m| make_site_observable(StateLabel::site(m)?, dim)).collect()
}

pub fn all_sites() -> Vec<usize> {
    (1..=NUM_SITES).collect()
}

/// `γ = 0, step, 2·step, …, ≤ max`.
pub fn gamma_grid(max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(max >= 0.0) {
        return Err(Error::InvalidGrid("gamma grid needs step > 0 and max ≥ 0".into()));
    }
    let n = (max / step + 1e-9).floor() as usize;
    // k·step rounded to the step's decimal precision keeps 9.1 exactly 9.1
    Ok((0..=n).map(|k| round_to(k as f64 * step, 12)).collect())
}

fn round_to(x: f64, digits: i32) -> f64 {
    let s = 10f64.powi(digits);
    (x * s).round() / s
}

/// Coherent K for every (observable, Δt), observable-major.
pub fn run_coherent_scan(
    model: &LindbladModel,
    rho0: InitialState,
    observables: &[DichotomicObservable],
    grid: &DtGrid,
    pattern: PatternChoice,
) -> Result<Vec<SweepRecord>> {
    let propagator = CoherentPropagator::for_model(model, NUM_SITES)?;
    let jobs: Vec<(&DichotomicObservable, f64)> =
        observables.iter().flat_map(|q| grid.points().iter().map(move |&dt| (q, dt))).collect();
    jobs.par_iter()
        .map(|&(q, dt)| {
            let r = lg_protocol(&propagator, q, &rho0, dt, pattern)?;
            Ok(SweepRecord::from_result("coherent-scan", 0.0, pattern, &r))
        })
        .collect()
}

/// One row of the strongest-violation table. `site == None` summarizes
/// all sites.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table2Row {
    pub initial_state: InitialState,
    pub site: Option<usize>,
    pub k_min: f64,
    pub dt_star: f64,
    pub pattern: String,
}

impl Table2Row {
    pub fn to_record(&self) -> SweepRecord {
        SweepRecord {
            experiment: "table2".into(),
            initial_state: self.initial_state.label(),
            observable: self.site.map_or_else(|| "all".to_string(), |m| format!("site{m}")),
            gamma_per_ps: 0.0,
            dt_ps: self.dt_star,
            pattern: self.pattern.clone(),
            k: self.k_min,
            violation: self.k_min < 0.0,
        }
    }
}

/// Strongest coherent violation per (initial state, site). The maximally
/// mixed state contributes one summary row over all sites.
pub fn run_table2(
    model: &LindbladModel,
    initial_states: &[InitialState],
    grid: &DtGrid,
    pattern: PatternChoice,
) -> Result<Vec<Table2Row>> {
    let propagator = CoherentPropagator::for_model(model, NUM_SITES)?;
    let observables = site_observables(&all_sites(), NUM_SITES)?;
    let mut rows = Vec::new();
    for &rho0 in initial_states {
        let per_site: Vec<Table2Row> = observables
            .iter()
            .zip(1..)
            .map(|(q, m)| {
                let s = find_strongest_violation(&propagator, q, &rho0, grid, pattern)?;
                Ok(Table2Row {
                    initial_state: rho0,
                    site: Some(m),
                    k_min: s.k_min,
                    dt_star: s.dt_star,
                    pattern: SweepRecord::from_result("", 0.0, pattern, &s.result).pattern,
                })
            })
            .collect::<Result<_>>()?;
        if rho0 == InitialState::MaximallyMixed7 {
            let best = per_site.into_iter().reduce(|a, b| if b.k_min < a.k_min { b } else { a }).expect("seven sites");
            rows.push(Table2Row { site: None, ..best });
        } else {
            rows.extend(per_site);
        }
    }
    Ok(rows)
}

/// Measurement interval per (initial state, site).
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DtTable(BTreeMap<String, f64>);

impl DtTable {
    fn key(rho0: InitialState, site: usize) -> String {
        format!("{}/site{}", rho0.label(), site)
    }

    pub fn insert(&mut self, rho0: InitialState, site: usize, dt: f64) {
        self.0.insert(Self::key(rho0, site), dt);
    }

    pub fn get(&self, rho0: InitialState, site: usize) -> Result<f64> {
        self.0
            .get(&Self::key(rho0, site))
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("no interval for {}", Self::key(rho0, site))))
    }

    pub fn from_table2(rows: &[Table2Row]) -> Self {
        let mut t = DtTable::default();
        for r in rows {
            if let Some(m) = r.site {
                t.insert(r.initial_state, m, r.dt_star);
            }
        }
        t
    }

    /// Intervals as printed in the reference table, ps.
    pub fn published() -> Self {
        const ROWS: [(InitialState, [f64; 7]); 3] = [
            (InitialState::Mixture16, [0.16678, 0.16678, 3.1021, 1.1008, 0.13343, 0.16678, 0.70048]),
            (InitialState::PureSite(1), [0.16678, 0.16678, 3.1355, 1.7345, 2.2015, 0.16678, 1.034]),
            (InitialState::PureSite(6), [0.13343, 1.034, 0.13343, 1.4677, 4.9701, 0.16678, 0.70048]),
        ];
        let mut t = DtTable::default();
        for (rho0, dts) in ROWS {
            for (m, dt) in (1..).zip(dts) {
                t.insert(rho0, m, dt);
            }
        }
        t
    }

    pub fn entries(&self) -> &BTreeMap<String, f64> {
        &self.0
    }
}

fn ensure_noisy_state(rho0: InitialState) -> Result<()> {
    if rho0 == InitialState::MaximallyMixed7 {
        return Err(Error::InvalidArgument("the maximally mixed state is not used in noisy sweeps".into()));
    }
    Ok(())
}

/// K at a single dephasing rate for each site, using the tabulated Δt.
pub fn lindblad_k_at(
    base: &LindbladModel,
    rho0: InitialState,
    sites: &[usize],
    gamma: f64,
    dt_table: &DtTable,
    pattern: PatternChoice,
) -> Result<Vec<LgResult>> {
    ensure_noisy_state(rho0)?;
    let propagator = LindbladPropagator::new(&base.clone().with_dephasing(gamma)?);
    let observables = site_observables(sites, FULL_DIM)?;
    sites
        .iter()
        .zip(&observables)
        .map(|(&m, q)| lg_protocol(&propagator, q, &rho0, dt_table.get(rho0, m)?, pattern))
        .collect()
}

/// K(γ) per site: for every site and every γ, the base model with uniform
/// dephasing γ evaluated at that site's tabulated interval. Site-major.
pub fn run_dephasing_sweep(
    base: &LindbladModel,
    rho0: InitialState,
    sites: &[usize],
    gammas: &[f64],
    dt_table: &DtTable,
    pattern: PatternChoice,
) -> Result<Vec<SweepRecord>> {
    ensure_noisy_state(rho0)?;
    if let Some(&g) = gammas.iter().find(|&&g| !(g >= 0.0)) {
        return Err(Error::NegativeRate { name: "gamma_deph", value: g });
    }
    let per_gamma: Vec<Vec<LgResult>> =
        gammas.par_iter().map(|&g| lindblad_k_at(base, rho0, sites, g, dt_table, pattern)).collect::<Result<_>>()?;
    let mut records = Vec::with_capacity(sites.len() * gammas.len());
    for s in 0..sites.len() {
        for (gi, &g) in gammas.iter().enumerate() {
            records.push(SweepRecord::from_result("dephasing-sweep", g, pattern, &per_gamma[gi][s]));
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustnessSummary {
    pub initial_state: String,
    pub site: usize,
    pub nominal_k: f64,
    pub max_shift: f64,
    /// Every perturbed K stayed negative.
    pub sign_preserved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustnessReport {
    pub gamma_per_ps: f64,
    pub sigma2: f64,
    pub seeds: Vec<u64>,
    pub summary: Vec<RobustnessSummary>,
    pub records: Vec<SweepRecord>,
}

impl RobustnessReport {
    pub fn max_shift(&self) -> f64 {
        self.summary.iter().map(|s| s.max_shift).fold(0.0, f64::max)
    }

    pub fn all_signs_preserved(&self) -> bool {
        self.summary.iter().all(|s| s.sign_preserved)
    }
}

/// Perturbs the Hamiltonian `trials` times and tracks how far every
/// violating (initial state, site) pair at `gamma` moves.
pub fn run_robustness(
    base: &LindbladModel,
    trials: usize,
    sigma2: f64,
    seed: u64,
    gamma: f64,
    dt_table: &DtTable,
    pattern: PatternChoice,
) -> Result<RobustnessReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("robustness needs at least one trial".into()));
    }
    let sites = all_sites();
    let evaluate = |model: &LindbladModel| -> Result<Vec<LgResult>> {
        let mut out = Vec::new();
        for rho0 in NOISY_INITIAL_STATES {
            out.extend(lindblad_k_at(model, rho0, &sites, gamma, dt_table, pattern)?);
        }
        Ok(out)
    };
    let nominal = evaluate(base)?;
    let seeds: Vec<u64> = (0..trials as u64).map(|t| seed.wrapping_add(t)).collect();
    let perturbed: Vec<Vec<LgResult>> = seeds
        .par_iter()
        .map(|&s| {
            let h = perturb_hamiltonian(base.hamiltonian(), sigma2, s)?;
            evaluate(&base.clone().with_hamiltonian(h))
        })
        .collect::<Result<_>>()?;

    let mut records: Vec<SweepRecord> =
        nominal.iter().map(|r| SweepRecord::from_result("robustness-nominal", gamma, pattern, r)).collect();
    for (t, trial) in perturbed.iter().enumerate() {
        let id = format!("robustness-trial{t}");
        records.extend(trial.iter().map(|r| SweepRecord::from_result(&id, gamma, pattern, r)));
    }

    let summary = nominal
        .iter()
        .enumerate()
        .filter(|(_, r)| r.violation())
        .map(|(i, r)| {
            let ks: Vec<f64> = perturbed.iter().map(|trial| trial[i].k).collect();
            RobustnessSummary {
                initial_state: r.initial_state.clone(),
                site: i % NUM_SITES + 1,
                nominal_k: r.k,
                max_shift: ks.iter().map(|k| (k - r.k).abs()).fold(0.0, f64::max),
                sign_preserved: ks.iter().all(|&k| k < 0.0),
            }
        })
        .collect();
    Ok(RobustnessReport { gamma_per_ps: gamma, sigma2, seeds, summary, records })
}

/// A trapping rate for [`run_trapping_variants`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TrappingRate {
    /// Physical rate in ps⁻¹.
    PerPs(f64),
    /// Whatever the base model already uses.
    Default,
}

impl TrappingRate {
    pub const LITERATURE: [TrappingRate; 4] =
        [TrappingRate::PerPs(0.25), TrappingRate::PerPs(1.0), TrappingRate::PerPs(4.0), TrappingRate::Default];

    pub fn label(&self) -> String {
        match self {
            TrappingRate::PerPs(r) => format_sig9(*r),
            TrappingRate::Default => "default".into(),
        }
    }

    pub fn apply(&self, base: &LindbladModel) -> Result<LindbladModel> {
        match *self {
            TrappingRate::PerPs(r) if r > 0.0 => base.clone().with_sink_rate(r),
            TrappingRate::PerPs(r) => Err(Error::NegativeRate { name: "gamma_sink", value: r }),
            TrappingRate::Default => Ok(base.clone()),
        }
    }
}

/// Reruns the room-temperature point for each trapping rate. Ordered by
/// rate, then initial state, then site.
pub fn run_trapping_variants(
    base: &LindbladModel,
    rates: &[TrappingRate],
    gamma: f64,
    dt_table: &DtTable,
    pattern: PatternChoice,
) -> Result<Vec<SweepRecord>> {
    let sites = all_sites();
    let per_rate: Vec<Vec<SweepRecord>> = rates
        .par_iter()
        .map(|rate| {
            let model = rate.apply(base)?;
            let id = format!("trapping-{}", rate.label());
            let mut out = Vec::new();
            for rho0 in NOISY_INITIAL_STATES {
                for r in lindblad_k_at(&model, rho0, &sites, gamma, dt_table, pattern)? {
                    out.push(SweepRecord::from_result(&id, gamma, pattern, &r));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_rate.into_iter().flatten().collect())
}

/// Populations of `G, 1..7, S` at `t = k·step`, `k = 0..=round(t_max/step)`.
pub fn population_trajectory(
    model: &LindbladModel,
    rho0: InitialState,
    t_max: f64,
    step: f64,
) -> Result<Vec<(f64, Vec<f64>)>> {
    if !(step > 0.0) || !(t_max >= 0.0) {
        return Err(Error::InvalidArgument("trajectory needs step > 0 and t_max ≥ 0".into()));
    }
    let n = (t_max / step).round() as usize;
    let propagator = LindbladPropagator::new(model);
    let mut rho = rho0.realize()?.into_matrix();
    let mut rows = Vec::with_capacity(n + 1);
    for k in 0..=n {
        if k > 0 {
            rho = propagator.evolve(&rho, step)?;
        }
        let pops = DensityOperator::new(rho.clone())
            .map_err(|e| Error::InvalidDensity(format!("at t = {}: {e}", k as f64 * step)))?
            .populations();
        rows.push((round_to(k as f64 * step, 12), pops));
    }
    Ok(rows)
}

pub const TRAJECTORY_HEADER: &str = "t_ps,pop_G,pop_1,pop_2,pop_3,pop_4,pop_5,pop_6,pop_7,pop_S";

pub fn write_trajectory_csv<W: Write>(rows: &[(f64, Vec<f64>)], mut out: W) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for (t, pops) in rows {
        let cols: Vec<String> = std::iter::once(*t).chain(pops.iter().copied()).map(format_sig9).collect();
        writeln!(out, "{}", cols.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmo::build_default_model;

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(9.1), "9.1");
        assert_eq!(format_sig9(-0.250525300325), "-0.2505253");
        assert_eq!(format_sig9(0.16678204759907603), "0.166782048");
        assert_eq!(format_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig9(12.0), "12");
        assert_eq!(format_sig9(-1.234567891e-7), "-1.23456789e-7");
        assert_eq!(format_sig9(5.0e-4), "0.0005");
    }

    #[test]
    fn csv_header_exact() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn anchors() {
        assert_eq!(TemperatureAnchor::for_gamma(9.1).unwrap().temperature_k, 298.0);
        assert_eq!(TemperatureAnchor::for_gamma(2.1).unwrap().temperature_k, 77.0);
        assert!(TemperatureAnchor::for_gamma(5.0).is_none());
    }

    #[test]
    fn gamma_grid_hits_anchors() {
        let g = gamma_grid(12.0, 0.1).unwrap();
        assert_eq!(g.len(), 121);
        assert!(g.contains(&9.1) && g.contains(&2.1));
        assert_eq!(*g.last().unwrap(), 12.0);
    }

    #[test]
    fn empty_site_list_gives_nothing() {
        let m = build_default_model();
        let grid = DtGrid::uniform(10, 5.0).unwrap();
        let out = run_coherent_scan(&m, InitialState::Mixture16, &[], &grid, PatternChoice::default()).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn maximally_mixed_excluded_from_noise() {
        let m = build_default_model();
        let r = run_dephasing_sweep(
            &m,
            InitialState::MaximallyMixed7,
            &[1],
            &[0.0],
            &DtTable::published(),
            PatternChoice::default(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn negative_gamma_rejected() {
        let m = build_default_model();
        let r = run_dephasing_sweep(
            &m,
            InitialState::Mixture16,
            &[1],
            &[-0.1],
            &DtTable::published(),
            PatternChoice::default(),
        );
        assert!(matches!(r, Err(Error::NegativeRate { .. })));
    }

    #[test]
    fn trajectory_grid() {
        let m = build_default_model();
        let rows = population_trajectory(&m, InitialState::PureSite(1), 5.0, 0.01).unwrap();
        assert_eq!(rows.len(), 501);
        assert_eq!(rows[500].0, 5.0);
        let sink: Vec<f64> = rows.iter().map(|r| r.1[8]).collect();
        assert!(sink.windows(2).all(|w| w[1] >= w[0] - 1e-15));
    }

    #[test]
    fn trapping_rate_must_be_positive() {
        let m = build_default_model();
        assert!(TrappingRate::PerPs(0.0).apply(&m).is_err());
        assert_eq!(TrappingRate::Default.apply(&m).unwrap(), m);
    }
}
