//! Two-time correlators and the Leggett-Garg quantity.
//!
//! For a dichotomic observable `Q` measured at `t₁ = 0`, `t₂ = Δt` and
//! `t₃ = 2Δt`, the correlators are
//!
//! ```text
//! C₁₂ = ½ Tr[Q · N_Δt({Q, ρ})]
//! C₂₃ = ½ Tr[Q · N_Δt({Q, N_Δt(ρ)})]
//! C₁₃ = ½ Tr[Q · N_2Δt({Q, ρ})]
//! ```
//!
//! where `N` is the evolution map. `C₁₃` belongs to runs that skip the
//! measurement at `t₂`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::NUM_SITES;
use crate::dynamics::{CoherentPropagator, Evolution};
use crate::error::{Error, Result};
use crate::fmo::InitialState;
use crate::linalg::{anticommutator, trace, ComplexMatrix, ComplexVector};
use crate::observable::{DichotomicObservable, ObservableLabel, NORMALIZATION_TOL};
use crate::units::SPEED_OF_LIGHT_CM_PER_PS;

/// Imaginary part of a correlator above which the evaluation is rejected.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-8;

/// Largest measurement interval searched, ps.
pub const MAX_DT_PS: f64 = 5.0;

/// Signs `(s₁₂, s₂₃, s₁₃)` obtained by flipping `Q` at one of the three
/// measurement times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignPattern {
    /// `C₁₂ + C₂₃ + C₁₃ + 1`
    Base,
    /// `−C₁₂ + C₂₃ − C₁₃ + 1`
    Flip1,
    /// `−C₁₂ − C₂₃ + C₁₃ + 1`, the survival-probability form
    Flip2,
    /// `C₁₂ − C₂₃ − C₁₃ + 1`
    Flip3,
}

impl SignPattern {
    pub const ALL: [SignPattern; 4] = [SignPattern::Base, SignPattern::Flip1, SignPattern::Flip2, SignPattern::Flip3];

    pub fn signs(self) -> (f64, f64, f64) {
        match self {
            SignPattern::Base => (1.0, 1.0, 1.0),
            SignPattern::Flip1 => (-1.0, 1.0, -1.0),
            SignPattern::Flip2 => (-1.0, -1.0, 1.0),
            SignPattern::Flip3 => (1.0, -1.0, -1.0),
        }
    }

    pub fn combine(self, c: Correlators) -> f64 {
        let (s12, s23, s13) = self.signs();
        s12 * c.c12 + s23 * c.c23 + s13 * c.c13 + 1.0
    }

    pub fn name(self) -> &'static str {
        match self {
            SignPattern::Base => "base",
            SignPattern::Flip1 => "flip1",
            SignPattern::Flip2 => "flip2",
            SignPattern::Flip3 => "flip3",
        }
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A fixed sign pattern, or the pointwise minimum over all four.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatternChoice {
    Fixed(SignPattern),
    Min,
}

impl PatternChoice {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "base" => Some(PatternChoice::Fixed(SignPattern::Base)),
            "flip1" => Some(PatternChoice::Fixed(SignPattern::Flip1)),
            "flip2" => Some(PatternChoice::Fixed(SignPattern::Flip2)),
            "flip3" => Some(PatternChoice::Fixed(SignPattern::Flip3)),
            "min" => Some(PatternChoice::Min),
            _ => None,
        }
    }

    /// The pattern and K it selects for these correlators.
    pub fn select(self, c: Correlators) -> (SignPattern, f64) {
        match self {
            PatternChoice::Fixed(p) => (p, p.combine(c)),
            PatternChoice::Min => SignPattern::ALL
                .iter()
                .map(|&p| (p, p.combine(c)))
                .fold((SignPattern::Base, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best }),
        }
    }
}

impl Default for PatternChoice {
    fn default() -> Self {
        PatternChoice::Fixed(SignPattern::Flip2)
    }
}

impl fmt::Display for PatternChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternChoice::Fixed(p) => write!(f, "{p}"),
            PatternChoice::Min => f.write_str("min"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlators {
    pub c12: f64,
    pub c23: f64,
    pub c13: f64,
}

/// Outcome of one three-time protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LgResult {
    pub correlators: Correlators,
    pub k: f64,
    pub pattern: SignPattern,
    /// `(t₁, t₂, t₃)` in ps.
    pub schedule: [f64; 3],
    pub observable: ObservableLabel,
    pub initial_state: String,
}

impl LgResult {
    /// Macrorealism requires `K ≥ 0`.
    pub fn violation(&self) -> bool {
        self.k < 0.0
    }

    pub fn dt(&self) -> f64 {
        self.schedule[1] - self.schedule[0]
    }

    pub fn k_for(&self, pattern: SignPattern) -> f64 {
        pattern.combine(self.correlators)
    }
}

fn real_part(z: crate::linalg::C64) -> Result<f64> {
    if z.im.abs() > IMAGINARY_RESIDUE_TOL {
        return Err(Error::ImaginaryResidue(z.im));
    }
    Ok(z.re)
}

/// `½ Tr[Q₂ · N_dt({Q₁, ρ₁})]` on raw matrices.
pub fn correlator_matrices<E: Evolution + ?Sized>(
    evolution: &E,
    q1: &ComplexMatrix,
    q2: &ComplexMatrix,
    rho1: &ComplexMatrix,
    dt: f64,
) -> Result<f64> {
    let x = evolution.evolve(&anticommutator(q1, rho1).scale(0.5), dt)?;
    real_part(trace(&(q2 * x)))
}

/// Two-time correlator `½ Tr[Q₂ · N_dt({Q₁, ρ₁})]`.
pub fn correlator<E: Evolution + ?Sized>(
    evolution: &E,
    q1: &DichotomicObservable,
    q2: &DichotomicObservable,
    rho1: &ComplexMatrix,
    dt: f64,
) -> Result<f64> {
    check_dim(evolution.dim(), q1.dim())?;
    check_dim(evolution.dim(), q2.dim())?;
    check_dim(evolution.dim(), rho1.nrows())?;
    if !(dt >= 0.0) {
        return Err(Error::NegativeTime(dt));
    }
    correlator_matrices(evolution, &q1.q(), &q2.q(), rho1, dt)
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// The three correlators of a uniform schedule with the same `Q` at every
/// time. `N_2Δt` is applied as `N_Δt ∘ N_Δt`.
pub fn lg_correlators<E: Evolution + ?Sized>(
    evolution: &E,
    q: &ComplexMatrix,
    rho0: &ComplexMatrix,
    dt: f64,
) -> Result<Correlators> {
    let measured = anticommutator(q, rho0).scale(0.5);
    let after_one = evolution.evolve(&measured, dt)?;
    let after_two = evolution.evolve(&after_one, dt)?;
    let c12 = real_part(trace(&(q * &after_one)))?;
    let c13 = real_part(trace(&(q * &after_two)))?;

    let rho2 = evolution.evolve(rho0, dt)?;
    let c23 = correlator_matrices(evolution, q, q, &rho2, dt)?;
    Ok(Correlators { c12, c23, c13 })
}

/// Runs the protocol `Q(0), Q(Δt), Q(2Δt)` from a prepared state.
pub fn lg_protocol<E: Evolution + ?Sized>(
    evolution: &E,
    q: &DichotomicObservable,
    rho0: &InitialState,
    dt: f64,
    pattern: PatternChoice,
) -> Result<LgResult> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveInterval(dt));
    }
    check_dim(evolution.dim(), q.dim())?;
    let rho = rho0.realize_in(evolution.dim())?;
    let correlators = lg_correlators(evolution, &q.q(), rho.matrix(), dt)?;
    let (pattern, k) = pattern.select(correlators);
    Ok(LgResult {
        correlators,
        k,
        pattern,
        schedule: [0.0, dt, 2.0 * dt],
        observable: q.label().clone(),
        initial_state: rho0.label(),
    })
}

/// Closed form of the survival-probability protocol for `Q_{|ψ⟩}` with
/// `ρ = |ψ⟩⟨ψ|`:
///
/// ```text
/// 4|⟨ψ|ψ_2Δt⟩|² − 4 Re[⟨ψ|ψ_Δt⟩² ⟨ψ_2Δt|ψ⟩]
/// ```
pub fn coherent_survival_k(propagator: &CoherentPropagator, psi: &ComplexVector, dt: f64) -> Result<f64> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { norm });
    }
    check_dim(propagator.dim(), psi.len())?;
    let a1 = psi.dotc(&propagator.apply_ket(psi, dt));
    let a2 = psi.dotc(&propagator.apply_ket(psi, 2.0 * dt));
    Ok(4.0 * a2.norm_sqr() - 4.0 * (a1 * a1 * a2.conj()).re)
}

/// Row families of the closed-form coherent LG table (pattern `Flip2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableIRow {
    /// `π₁,₆` measured at `site`.
    Mixture16 { site: usize },
    /// `|p⟩⟨p|` (p ∈ {1, 6}) measured at `site`.
    PureSite { initial: usize, site: usize },
    /// Maximally mixed state on the seven sites.
    MaximallyMixed { site: usize },
}

impl TableIRow {
    pub fn new(initial: InitialState, site: usize) -> Result<Self> {
        if !(1..=NUM_SITES).contains(&site) {
            return Err(Error::SiteOutOfRange(site));
        }
        match initial {
            InitialState::Mixture16 => Ok(TableIRow::Mixture16 { site }),
            InitialState::PureSite(p @ (1 | 6)) => Ok(TableIRow::PureSite { initial: p, site }),
            InitialState::MaximallyMixed7 => Ok(TableIRow::MaximallyMixed { site }),
            other => Err(Error::UnknownTableRow { state: other.label(), site }),
        }
    }

    pub fn initial_state(&self) -> InitialState {
        match *self {
            TableIRow::Mixture16 { .. } => InitialState::Mixture16,
            TableIRow::PureSite { initial, .. } => InitialState::PureSite(initial),
            TableIRow::MaximallyMixed { .. } => InitialState::MaximallyMixed7,
        }
    }

    pub fn site(&self) -> usize {
        match *self {
            TableIRow::Mixture16 { site } | TableIRow::PureSite { site, .. } | TableIRow::MaximallyMixed { site } => {
                site
            }
        }
    }

    /// All 28 rows: three prepared states and the maximally mixed one, by site.
    pub fn all() -> Vec<TableIRow> {
        let states = [
            InitialState::Mixture16,
            InitialState::PureSite(1),
            InitialState::PureSite(6),
            InitialState::MaximallyMixed7,
        ];
        states.iter().flat_map(|&s| (1..=NUM_SITES).map(move |m| TableIRow::new(s, m).expect("valid row"))).collect()
    }
}

/// Evaluates the closed form of a coherent LG table row at interval `dt`.
///
/// `propagator` must act on the seven-site space; overlaps are
/// `⟨a|b_t⟩ = ⟨a|e^{−iHt}|b⟩`.
pub fn coherent_table1_k(propagator: &CoherentPropagator, row: TableIRow, dt: f64) -> Result<f64> {
    check_dim(NUM_SITES, propagator.dim())?;
    let u1 = propagator.unitary(dt);
    let u2 = propagator.unitary(2.0 * dt);
    // ⟨a|b_Δt⟩ and ⟨a|b_2Δt⟩ with 1-based site labels
    let o1 = |a: usize, b: usize| u1[(a - 1, b - 1)];
    let o2 = |a: usize, b: usize| u2[(a - 1, b - 1)];
    // ⟨x_2Δt|y_Δt⟩
    let cross = |x: usize, y: usize| u2.column(x - 1).dotc(&u1.column(y - 1));

    let m = row.site();
    let k = match row {
        TableIRow::Mixture16 { .. } => {
            // ⟨m|(|1_Δt⟩⟨1_2Δt| + |6_Δt⟩⟨6_2Δt|)|m⟩
            let sandwich = o1(m, 1) * o2(m, 1).conj() + o1(m, 6) * o2(m, 6).conj();
            let interference = (sandwich * o1(m, m)).re;
            let first = match m {
                1 => o1(1, 6).norm_sqr() + o2(1, 1).norm_sqr(),
                6 => o1(6, 1).norm_sqr() + o2(6, 6).norm_sqr(),
                _ => o1(m, 1).norm_sqr() + o1(m, 6).norm_sqr(),
            };
            2.0 * (first - interference)
        }
        TableIRow::PureSite { initial: p, .. } if p == m => {
            4.0 * o2(p, p).norm_sqr() - 4.0 * (o2(p, p).conj() * o1(p, p) * o1(p, p)).re
        }
        TableIRow::PureSite { initial: p, .. } => {
            2.0 * o1(m, p).norm_sqr() - 4.0 * (o1(m, p) * o2(m, p).conj() * o1(m, m)).re
                + 2.0 * (cross(p, m) * o1(m, p)).re
        }
        TableIRow::MaximallyMixed { .. } => {
            let d = NUM_SITES as f64;
            4.0 / d - 8.0 / d * o1(m, m).norm_sqr() + 4.0 / d * o2(m, m).norm_sqr()
        }
    };
    Ok(k)
}

/// Ascending measurement intervals within `(0, 5]` ps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtGrid(Vec<f64>);

impl DtGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if points.iter().any(|&t| !(t > 0.0 && t <= MAX_DT_PS)) {
            return Err(Error::InvalidGrid(format!("grid points must lie in (0, {MAX_DT_PS}] ps")));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("grid must be strictly ascending".into()));
        }
        Ok(DtGrid(points))
    }

    /// `n` evenly spaced points `k·t_max/n`, `k = 1..=n`.
    pub fn uniform(n: usize, t_max: f64) -> Result<Self> {
        Self::new((1..=n).map(|k| k as f64 * t_max / n as f64).collect())
    }

    /// The reference grid `k·0.001/c` ps (k = 1..149) behind the published
    /// strongest-violation table.
    pub fn published() -> Self {
        let step = 1e-3 / SPEED_OF_LIGHT_CM_PER_PS;
        let n = (MAX_DT_PS / step).floor() as usize;
        DtGrid((1..=n).map(|k| k as f64 * step).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Minimum of K over a grid and where it is attained.
#[derive(Debug, Clone, PartialEq)]
pub struct StrongestViolation {
    pub k_min: f64,
    pub dt_star: f64,
    pub result: LgResult,
}

/// Exhaustive search over `grid`. Ties go to the smallest interval.
pub fn find_strongest_violation<E: Evolution + ?Sized>(
    evolution: &E,
    q: &DichotomicObservable,
    rho0: &InitialState,
    grid: &DtGrid,
    pattern: PatternChoice,
) -> Result<StrongestViolation> {
    let results: Vec<LgResult> =
        grid.points().par_iter().map(|&dt| lg_protocol(evolution, q, rho0, dt, pattern)).collect::<Result<_>>()?;
    let best = results.into_iter().reduce(|best, r| if r.k < best.k { r } else { best }).expect("grid is nonempty");
    Ok(StrongestViolation { k_min: best.k, dt_star: best.dt(), result: best })
}
