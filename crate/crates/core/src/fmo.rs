//! The nine-level FMO model: site Hamiltonian, Lindblad rates and the
//! canonical initial states.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::basis::{StateLabel, FULL_DIM, NUM_SITES};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigendecomposition, ComplexMatrix, HermitianEigen, C64};
use crate::observable::{make_state_observable, DichotomicObservable, ObservableLabel};
use crate::state::DensityOperator;
use crate::units::{Clock, RatePerPs, Wavenumber};

/// Site energies and couplings of one FMO unit, in cm⁻¹ (Adolphs & Renger).
pub const DEFAULT_HAMILTONIAN_CM: [[f64; NUM_SITES]; NUM_SITES] = [
    [215.0, -104.1, 5.1, -4.3, 4.7, -15.1, -7.8],
    [-104.1, 220.0, 32.6, 7.1, 5.4, 8.3, 0.8],
    [5.1, 32.6, 0.0, -46.8, 1.0, -8.1, 5.1],
    [-4.3, 7.1, -46.8, 125.0, -70.7, -14.7, -61.5],
    [4.7, 5.4, 1.0, -70.7, 450.0, 89.7, -2.5],
    [-15.1, 8.3, -8.1, -14.7, 89.7, 330.0, 32.7],
    [-7.8, 0.8, 5.1, -61.5, -2.5, 32.7, 280.0],
];

/// Trapping rate into the reaction center, cm⁻¹.
pub const DEFAULT_SINK_CM: f64 = 62.8 / 1.88;
/// Uniform recombination rate, cm⁻¹.
pub const DEFAULT_RECOMBINATION_CM: f64 = 1.0 / (2.0 * 188.0);
/// The site that feeds the sink.
pub const SINK_SITE: usize = 3;

/// Real symmetric 7×7 site Hamiltonian in cm⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian7 {
    entries: [[f64; NUM_SITES]; NUM_SITES],
}

impl Hamiltonian7 {
    /// Rejects matrices that are not exactly symmetric.
    pub fn new(entries: [[f64; NUM_SITES]; NUM_SITES]) -> Result<Self> {
        for i in 0..NUM_SITES {
            for j in 0..i {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::NotHermitian { deviation: (entries[i][j] - entries[j][i]).abs() });
                }
            }
        }
        if entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("Hamiltonian entries must be finite".into()));
        }
        Ok(Hamiltonian7 { entries })
    }

    /// 1-based `(m, n)`.
    pub fn entry(&self, m: usize, n: usize) -> Wavenumber {
        Wavenumber(self.entries[m - 1][n - 1])
    }

    pub fn entries(&self) -> &[[f64; NUM_SITES]; NUM_SITES] {
        &self.entries
    }

    /// Sites-only matrix, in cm⁻¹.
    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(NUM_SITES, NUM_SITES, |i, j| C64::new(self.entries[i][j], 0.0))
    }

    /// Nine-level matrix in cm⁻¹ with zero rows and columns for G and S.
    pub fn embed_full(&self) -> ComplexMatrix {
        let mut full = ComplexMatrix::zeros(FULL_DIM, FULL_DIM);
        full.view_mut((1, 1), (NUM_SITES, NUM_SITES)).copy_from(&self.to_matrix());
        full
    }

    /// Site block of a nine-level matrix (real parts).
    pub fn from_full(full: &ComplexMatrix) -> Result<Self> {
        crate::linalg::ensure_square(full, FULL_DIM)?;
        let mut entries = [[0.0; NUM_SITES]; NUM_SITES];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = full[(i + 1, j + 1)].re;
            }
        }
        Hamiltonian7::new(entries)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..NUM_SITES {
            for j in 0..NUM_SITES {
                worst = worst.max((self.entries[i][j] - self.entries[j][i]).abs());
            }
        }
        worst
    }

    /// Exciton basis: eigenpairs in cm⁻¹, ascending energy.
    pub fn excitons(&self) -> HermitianEigen {
        hermitian_eigendecomposition(&self.to_matrix()).expect("symmetric by construction")
    }
}

impl Default for Hamiltonian7 {
    fn default() -> Self {
        build_default_hamiltonian()
    }
}

pub fn build_default_hamiltonian() -> Hamiltonian7 {
    Hamiltonian7 { entries: DEFAULT_HAMILTONIAN_CM }
}

/// Adds independent zero-mean Gaussian noise of variance `sigma2` (cm⁻²) to
/// every upper-triangle entry, diagonal included, and mirrors it.
pub fn perturb_hamiltonian(h: &Hamiltonian7, sigma2: f64, seed: u64) -> Result<Hamiltonian7> {
    if !(sigma2 >= 0.0) {
        return Err(Error::InvalidArgument(format!("variance must be nonnegative, got {sigma2}")));
    }
    if sigma2 == 0.0 {
        return Ok(*h);
    }
    let normal = Normal::new(0.0, sigma2.sqrt()).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = *h.entries();
    for i in 0..NUM_SITES {
        for j in i..NUM_SITES {
            entries[i][j] += normal.sample(&mut rng);
            entries[j][i] = entries[i][j];
        }
    }
    Hamiltonian7::new(entries)
}

/// Hamiltonian plus the recombination, trapping and dephasing rates.
///
/// Rates are held as given (physical ps⁻¹ for Γ, axis labels for γ); the
/// [`Clock`] turns them into generator rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LindbladModel {
    hamiltonian: Hamiltonian7,
    gamma_deph: [RatePerPs; NUM_SITES],
    gamma_recomb: [RatePerPs; NUM_SITES],
    gamma_sink: RatePerPs,
    clock: Clock,
}

/// The reference model: default Hamiltonian, Γ_sink = 62.8/1.88 cm⁻¹,
/// Γ_m = 1/(2·188) cm⁻¹, no dephasing, published clock.
pub fn build_default_model() -> LindbladModel {
    let sink = Clock::Angular.wavenumber_rate(Wavenumber(DEFAULT_SINK_CM));
    let recomb = Clock::Angular.wavenumber_rate(Wavenumber(DEFAULT_RECOMBINATION_CM));
    LindbladModel {
        hamiltonian: build_default_hamiltonian(),
        gamma_deph: [RatePerPs::ZERO; NUM_SITES],
        gamma_recomb: [RatePerPs::named("gamma_recomb", recomb).unwrap(); NUM_SITES],
        gamma_sink: RatePerPs::named("gamma_sink", sink).unwrap(),
        clock: Clock::Published,
    }
}

impl LindbladModel {
    /// Purely coherent dynamics under `h`.
    pub fn coherent(hamiltonian: Hamiltonian7, clock: Clock) -> Self {
        LindbladModel {
            hamiltonian,
            gamma_deph: [RatePerPs::ZERO; NUM_SITES],
            gamma_recomb: [RatePerPs::ZERO; NUM_SITES],
            gamma_sink: RatePerPs::ZERO,
            clock,
        }
    }

    pub fn with_hamiltonian(mut self, hamiltonian: Hamiltonian7) -> Self {
        self.hamiltonian = hamiltonian;
        self
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    /// Uniform dephasing γ_m = γ.
    pub fn with_dephasing(self, gamma_per_ps: f64) -> Result<Self> {
        self.with_site_dephasing([gamma_per_ps; NUM_SITES])
    }

    pub fn with_site_dephasing(mut self, gammas: [f64; NUM_SITES]) -> Result<Self> {
        for (slot, g) in self.gamma_deph.iter_mut().zip(gammas) {
            *slot = RatePerPs::named("gamma_deph", g)?;
        }
        Ok(self)
    }

    pub fn with_sink_rate(mut self, rate_per_ps: f64) -> Result<Self> {
        self.gamma_sink = RatePerPs::named("gamma_sink", rate_per_ps)?;
        Ok(self)
    }

    pub fn with_sink_wavenumber(self, cm: f64) -> Result<Self> {
        if cm < 0.0 {
            return Err(Error::NegativeRate { name: "gamma_sink", value: cm });
        }
        self.with_sink_rate(Clock::Angular.wavenumber_rate(Wavenumber(cm)))
    }

    /// Uniform recombination rate Γ_m, in cm⁻¹.
    pub fn with_recombination_wavenumber(mut self, cm: f64) -> Result<Self> {
        if cm.is_nan() || cm < 0.0 {
            return Err(Error::NegativeRate { name: "gamma_recomb", value: cm });
        }
        let rate = RatePerPs::named("gamma_recomb", Clock::Angular.wavenumber_rate(Wavenumber(cm)))?;
        self.gamma_recomb = [rate; NUM_SITES];
        Ok(self)
    }

    pub fn hamiltonian(&self) -> &Hamiltonian7 {
        &self.hamiltonian
    }

    pub fn clock(&self) -> Clock {
        self.clock
    }

    pub fn gamma_deph(&self) -> &[RatePerPs; NUM_SITES] {
        &self.gamma_deph
    }

    pub fn gamma_recomb(&self) -> &[RatePerPs; NUM_SITES] {
        &self.gamma_recomb
    }

    pub fn gamma_sink(&self) -> RatePerPs {
        self.gamma_sink
    }

    pub fn is_coherent(&self) -> bool {
        self.gamma_sink == RatePerPs::ZERO
            && self.gamma_deph.iter().chain(&self.gamma_recomb).all(|&r| r == RatePerPs::ZERO)
    }

    /// Nine-level Hamiltonian in generator units (rad per clock unit).
    pub fn generator_hamiltonian(&self) -> ComplexMatrix {
        self.hamiltonian.embed_full() * C64::new(self.clock.wavenumber_rate(Wavenumber(1.0)), 0.0)
    }

    /// Sites-only Hamiltonian in generator units.
    pub fn generator_site_hamiltonian(&self) -> ComplexMatrix {
        self.hamiltonian.to_matrix() * C64::new(self.clock.wavenumber_rate(Wavenumber(1.0)), 0.0)
    }

    pub fn generator_sink_rate(&self) -> f64 {
        self.clock.physical_rate(self.gamma_sink)
    }

    pub fn generator_recombination_rates(&self) -> [f64; NUM_SITES] {
        self.gamma_recomb.map(|r| self.clock.physical_rate(r))
    }

    pub fn generator_dephasing_rates(&self) -> [f64; NUM_SITES] {
        self.gamma_deph.map(|r| self.clock.dephasing_rate(r))
    }

    /// `Q_{|φ_m⟩}` for every exciton, ascending energy, in dimension `dim`.
    pub fn exciton_observables(&self, dim: usize) -> Result<Vec<DichotomicObservable>> {
        let eig = self.hamiltonian.excitons();
        (0..NUM_SITES)
            .map(|k| {
                let q = make_state_observable(&eig.vector(k), ObservableLabel::Exciton(k + 1))?;
                match dim {
                    NUM_SITES => Ok(q),
                    _ => q.embed_full(),
                }
            })
            .collect()
    }
}

/// Prepared state at the first measurement time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InitialState {
    PureSite(usize),
    /// `½(|1⟩⟨1| + |6⟩⟨6|)`
    Mixture16,
    /// `(1/7) Σ_m |m⟩⟨m|`
    MaximallyMixed7,
}

impl InitialState {
    pub fn label(&self) -> String {
        self.to_string()
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mix16" => Ok(InitialState::Mixture16),
            "maxmix7" => Ok(InitialState::MaximallyMixed7),
            _ => {
                let m = s
                    .strip_prefix("site")
                    .and_then(|n| n.parse::<usize>().ok())
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown initial state `{s}`")))?;
                StateLabel::site(m)?;
                Ok(InitialState::PureSite(m))
            }
        }
    }

    /// Site populations; the state is diagonal in the site basis.
    pub fn site_weights(&self) -> Result<[f64; NUM_SITES]> {
        let mut w = [0.0; NUM_SITES];
        match *self {
            InitialState::PureSite(m) => {
                StateLabel::site(m)?;
                w[m - 1] = 1.0;
            }
            InitialState::Mixture16 => {
                w[0] = 0.5;
                w[5] = 0.5;
            }
            InitialState::MaximallyMixed7 => w = [1.0 / NUM_SITES as f64; NUM_SITES],
        }
        Ok(w)
    }

    /// Density operator on the nine-level space.
    pub fn realize(&self) -> Result<DensityOperator> {
        self.realize_in(FULL_DIM)
    }

    /// Density operator on the sites-only (7) or full (9) space.
    pub fn realize_in(&self, dim: usize) -> Result<DensityOperator> {
        let w = self.site_weights()?;
        let mut rho = ComplexMatrix::zeros(dim, dim);
        for (k, &p) in w.iter().enumerate() {
            let i = StateLabel::Site(k as u8 + 1).index_in(dim)?;
            rho[(i, i)] = C64::new(p, 0.0);
        }
        DensityOperator::new(rho)
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialState::PureSite(m) => write!(f, "site{m}"),
            InitialState::Mixture16 => f.write_str("mix16"),
            InitialState::MaximallyMixed7 => f.write_str("maxmix7"),
        }
    }
}
