//! Coherent and Lindblad propagation of density operators.
//!
//! The master equation is
//!
//! ```text
//! dρ/dt = −i[H, ρ] + L_diss(ρ) + L_sink(ρ) + L_deph(ρ)
//! ```
//!
//! with every dissipative term of the form `ζ(2AρA† − {A†A, ρ})`. The
//! Liouvillian is assembled as an 81×81 matrix acting on column-stacked
//! density operators and propagated exactly with [`expm`].

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::basis::{StateLabel, FULL_DIM, NUM_SITES};
use crate::error::{Error, Result};
use crate::expm::expm;
use crate::fmo::{LindbladModel, SINK_SITE};
use crate::linalg::{
    anticommutator, basis_vector, commutator, ensure_square, hermitian_eigendecomposition, identity, unvectorize,
    vectorize, ComplexMatrix, ComplexVector, HermitianEigen, I,
};
use crate::state::DensityOperator;

/// Linear evolution of operators over a nonnegative interval.
///
/// Applies to any matrix, not only states: correlators propagate
/// anticommutators such as `{Q, ρ}`.
pub trait Evolution: Sync {
    fn dim(&self) -> usize;

    fn evolve(&self, x: &ComplexMatrix, t: f64) -> Result<ComplexMatrix>;
}

fn ket_bra(dim: usize, to: usize, from: usize) -> ComplexMatrix {
    basis_vector(dim, to) * basis_vector(dim, from).adjoint()
}

/// `ζ(2AρA† − {A†A, ρ})`
fn lindblad_term(a: &ComplexMatrix, rate: f64, rho: &ComplexMatrix) -> ComplexMatrix {
    let ada = a.adjoint() * a;
    (a * rho * a.adjoint()).scale(2.0 * rate) - anticommutator(&ada, rho).scale(rate)
}

/// Recombination `Σ_m Γ_m(2|G⟩⟨m|ρ|m⟩⟨G| − {|m⟩⟨m|, ρ})`.
pub fn apply_dissipator(model: &LindbladModel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(rho, FULL_DIM)?;
    let g = StateLabel::Ground.index();
    let mut out = ComplexMatrix::zeros(FULL_DIM, FULL_DIM);
    for (k, &rate) in model.generator_recombination_rates().iter().enumerate() {
        out += lindblad_term(&ket_bra(FULL_DIM, g, k + 1), rate, rho);
    }
    Ok(out)
}

/// Trapping `Γ_sink(2|S⟩⟨3|ρ|3⟩⟨S| − {|3⟩⟨3|, ρ})`.
pub fn apply_sink(model: &LindbladModel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(rho, FULL_DIM)?;
    let a = ket_bra(FULL_DIM, StateLabel::Sink.index(), SINK_SITE);
    Ok(lindblad_term(&a, model.generator_sink_rate(), rho))
}

/// Site dephasing `Σ_m γ_m(2|m⟩⟨m|ρ|m⟩⟨m| − {|m⟩⟨m|, ρ})`.
pub fn apply_dephasing(model: &LindbladModel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(rho, FULL_DIM)?;
    let mut out = ComplexMatrix::zeros(FULL_DIM, FULL_DIM);
    for (k, &rate) in model.generator_dephasing_rates().iter().enumerate() {
        out += lindblad_term(&ket_bra(FULL_DIM, k + 1, k + 1), rate, rho);
    }
    Ok(out)
}

/// Right-hand side of the master equation evaluated directly on `ρ`.
pub fn master_equation_rhs(model: &LindbladModel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let h = model.generator_hamiltonian();
    Ok(commutator(&h, rho) * (-I)
        + apply_dissipator(model, rho)?
        + apply_sink(model, rho)?
        + apply_dephasing(model, rho)?)
}

/// Generator of the master equation on column-stacked 9×9 operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    matrix: ComplexMatrix,
}

impl Liouvillian {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        ensure_square(x, FULL_DIM)?;
        Ok(unvectorize(&(&self.matrix * vectorize(x)), FULL_DIM))
    }

    /// `max_k |Σ_i L[(i,i), k]|`: how far `Tr ∘ L` is from zero.
    pub fn trace_functional_error(&self) -> f64 {
        let tr = vectorize(&identity(FULL_DIM)).transpose();
        (tr * &self.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `vec(AXB) = (Bᵀ ⊗ A) vec(X)`
fn sandwich(left: &ComplexMatrix, right: &ComplexMatrix) -> ComplexMatrix {
    right.transpose().kronecker(left)
}

fn lindblad_superoperator(a: &ComplexMatrix, rate: f64) -> ComplexMatrix {
    let id = identity(a.nrows());
    let ada = a.adjoint() * a;
    (sandwich(a, &a.adjoint()).scale(2.0) - sandwich(&ada, &id) - sandwich(&id, &ada)).scale(rate)
}

pub fn build_liouvillian(model: &LindbladModel) -> Liouvillian {
    let id = identity(FULL_DIM);
    let h = model.generator_hamiltonian();
    let mut l = (sandwich(&h, &id) - sandwich(&id, &h)) * (-I);

    let g = StateLabel::Ground.index();
    for (k, &rate) in model.generator_recombination_rates().iter().enumerate() {
        if rate != 0.0 {
            l += lindblad_superoperator(&ket_bra(FULL_DIM, g, k + 1), rate);
        }
    }
    let sink = model.generator_sink_rate();
    if sink != 0.0 {
        l += lindblad_superoperator(&ket_bra(FULL_DIM, StateLabel::Sink.index(), SINK_SITE), sink);
    }
    for (k, &rate) in model.generator_dephasing_rates().iter().enumerate() {
        if rate != 0.0 {
            l += lindblad_superoperator(&ket_bra(FULL_DIM, k + 1, k + 1), rate);
        }
    }
    Liouvillian { matrix: l }
}

const MAP_CACHE_CAPACITY: usize = 16;

/// The CPTP maps `N_t = exp(L·t)` of one model.
///
/// Maps are cached per interval; LG protocols only ever need Δt and 2Δt.
#[derive(Debug)]
pub struct LindbladPropagator {
    liouvillian: Liouvillian,
    cache: Mutex<HashMap<u64, Arc<ComplexMatrix>>>,
}

impl LindbladPropagator {
    pub fn new(model: &LindbladModel) -> Self {
        LindbladPropagator { liouvillian: build_liouvillian(model), cache: Mutex::new(HashMap::new()) }
    }

    pub fn liouvillian(&self) -> &Liouvillian {
        &self.liouvillian
    }

    /// The 81×81 transfer matrix of `N_t`.
    pub fn map(&self, t: f64) -> Result<Arc<ComplexMatrix>> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        let key = t.to_bits();
        if let Some(m) = self.cache.lock().unwrap().get(&key) {
            return Ok(Arc::clone(m));
        }
        let m = Arc::new(expm(&self.liouvillian.matrix.scale(t)));
        let mut cache = self.cache.lock().unwrap();
        if cache.len() >= MAP_CACHE_CAPACITY {
            cache.clear();
        }
        cache.insert(key, Arc::clone(&m));
        Ok(m)
    }

    pub fn propagate(&self, rho: &DensityOperator, t: f64) -> Result<DensityOperator> {
        Ok(DensityOperator::from_evolved(self.evolve(rho.matrix(), t)?))
    }
}

impl Evolution for LindbladPropagator {
    fn dim(&self) -> usize {
        FULL_DIM
    }

    fn evolve(&self, x: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
        ensure_square(x, FULL_DIM)?;
        let map = self.map(t)?;
        Ok(unvectorize(&(map.as_ref() * vectorize(x)), FULL_DIM))
    }
}

/// `ρ(t) = N_t(ρ)` under the full master equation.
pub fn propagate(model: &LindbladModel, rho: &DensityOperator, t: f64) -> Result<DensityOperator> {
    LindbladPropagator::new(model).propagate(rho, t)
}

/// Unitary evolution `e^{−iHt}` through the eigendecomposition of `H`.
#[derive(Debug, Clone)]
pub struct CoherentPropagator {
    eigen: HermitianEigen,
}

impl CoherentPropagator {
    /// `h` in generator units (rad per unit time).
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        Ok(CoherentPropagator { eigen: hermitian_eigendecomposition(h)? })
    }

    /// Coherent part of `model` on the sites-only (7) or full (9) space.
    pub fn for_model(model: &LindbladModel, dim: usize) -> Result<Self> {
        match dim {
            NUM_SITES => Self::new(&model.generator_site_hamiltonian()),
            FULL_DIM => Self::new(&model.generator_hamiltonian()),
            d => Err(Error::DimensionMismatch { expected: FULL_DIM, found: d }),
        }
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    /// `e^{−iHt}`
    pub fn unitary(&self, t: f64) -> ComplexMatrix {
        self.eigen.map_spectrum(|e| (-I * e * t).exp())
    }

    pub fn apply(&self, rho: &DensityOperator, t: f64) -> Result<DensityOperator> {
        Ok(DensityOperator::from_evolved(self.evolve(rho.matrix(), t)?))
    }

    /// `e^{−iHt}|ψ⟩`
    pub fn apply_ket(&self, psi: &ComplexVector, t: f64) -> ComplexVector {
        self.unitary(t) * psi
    }
}

impl Evolution for CoherentPropagator {
    fn dim(&self) -> usize {
        self.eigen.values.len()
    }

    fn evolve(&self, x: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
        ensure_square(x, self.dim())?;
        let u = self.unitary(t);
        Ok(&u * x * u.adjoint())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmo::{build_default_model, InitialState};
    use crate::linalg::{max_abs, max_abs_diff, outer, trace, C64};
    use crate::units::Clock;

    fn proj(i: usize) -> ComplexMatrix {
        outer(&basis_vector(FULL_DIM, i))
    }

    fn random_matrix(seed: u64) -> ComplexMatrix {
        // small LCG keeps this test free of RNG crates
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ComplexMatrix::from_fn(FULL_DIM, FULL_DIM, |_, _| {
            let mut next = || {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            };
            C64::new(next(), next())
        })
    }

    #[test]
    fn dissipator_zero_on_ground() {
        let m = build_default_model();
        let out = apply_dissipator(&m, &proj(0)).unwrap();
        assert_eq!(max_abs(&out), 0.0);
    }

    #[test]
    fn dissipator_on_site_one() {
        let m = build_default_model();
        let g = m.generator_recombination_rates()[0];
        let out = apply_dissipator(&m, &proj(1)).unwrap();
        let expected = (proj(0) - proj(1)).scale(2.0 * g);
        assert!(max_abs_diff(&out, &expected) < 1e-18);
    }

    #[test]
    fn sink_on_site_three() {
        let m = build_default_model();
        let out = apply_sink(&m, &proj(3)).unwrap();
        let expected = (proj(8) - proj(3)).scale(2.0 * m.generator_sink_rate());
        assert!(max_abs_diff(&out, &expected) < 1e-15);
    }

    #[test]
    fn dephasing_ignores_populations() {
        let m = build_default_model().with_dephasing(3.0).unwrap();
        let rho = InitialState::Mixture16.realize().unwrap();
        assert_eq!(max_abs(&apply_dephasing(&m, rho.matrix()).unwrap()), 0.0);
    }

    #[test]
    fn zero_dephasing_contributes_nothing() {
        let m = build_default_model();
        assert_eq!(max_abs(&apply_dephasing(&m, &random_matrix(3)).unwrap()), 0.0);
    }

    #[test]
    fn coherence_decays_at_twice_gamma() {
        // single coherence |1⟩⟨2|; brute force from the superoperator
        let m = build_default_model().with_dephasing(1.5).unwrap().with_clock(Clock::Angular);
        let x = ket_bra(FULL_DIM, 1, 2);
        let out = apply_dephasing(&m, &x).unwrap();
        let via_l = lindblad_superoperator(&proj(1), 1.5) + lindblad_superoperator(&proj(2), 1.5);
        let brute = unvectorize(&(via_l * vectorize(&x)), FULL_DIM);
        assert!(max_abs_diff(&out, &brute) < 1e-15);
        assert!((out[(1, 2)].re + 2.0 * 1.5).abs() < 1e-15);
    }

    #[test]
    fn dissipators_are_traceless_and_hermiticity_preserving() {
        let m = build_default_model().with_dephasing(2.1).unwrap();
        for seed in 0..10 {
            let x = random_matrix(seed);
            let rho = &x * x.adjoint();
            for f in [apply_dissipator, apply_sink, apply_dephasing] {
                let out = f(&m, &rho).unwrap();
                assert!(trace(&out).norm() < 1e-14);
                assert!(max_abs_diff(&out, &out.adjoint()) < 1e-14);
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let m = build_default_model();
        assert!(matches!(apply_sink(&m, &identity(7)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn liouvillian_matches_direct_formula() {
        let m = build_default_model().with_dephasing(9.1).unwrap();
        let l = build_liouvillian(&m);
        assert_eq!(l.matrix().shape(), (81, 81));
        assert!(l.trace_functional_error() < 1e-10);
        for seed in 0..20 {
            let x = random_matrix(seed);
            let diff = max_abs_diff(&l.apply(&x).unwrap(), &master_equation_rhs(&m, &x).unwrap());
            assert!(diff <= 1e-12, "{diff}");
        }
    }

    #[test]
    fn negative_time_rejected() {
        let m = build_default_model();
        let rho = InitialState::PureSite(1).realize().unwrap();
        assert_eq!(propagate(&m, &rho, -0.1), Err(Error::NegativeTime(-0.1)));
    }

    #[test]
    fn zero_time_is_identity() {
        let m = build_default_model().with_dephasing(2.1).unwrap();
        let rho = InitialState::Mixture16.realize().unwrap();
        let out = propagate(&m, &rho, 0.0).unwrap();
        assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-12);
    }

    #[test]
    fn absorbing_states_collect_everything() {
        let m = build_default_model().with_dephasing(2.1).unwrap();
        let rho = InitialState::Mixture16.realize().unwrap();
        let pops = propagate(&m, &rho, 400.0).unwrap().populations();
        let sites: f64 = pops[1..8].iter().sum();
        assert!(sites < 1e-6, "{pops:?}");
        assert!((pops[0] + pops[8] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn coherent_limit_matches_unitary() {
        let m = LindbladModel::coherent(crate::fmo::build_default_hamiltonian(), Clock::Published);
        let lp = LindbladPropagator::new(&m);
        let cp = CoherentPropagator::for_model(&m, FULL_DIM).unwrap();
        let rho = InitialState::Mixture16.realize().unwrap();
        for t in [0.1, 1.0, 2.5, 5.0] {
            let a = lp.propagate(&rho, t).unwrap();
            let b = cp.apply(&rho, t).unwrap();
            assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-9);
        }
    }

    #[test]
    fn coherent_group_law_and_norm() {
        let m = build_default_model();
        let cp = CoherentPropagator::for_model(&m, NUM_SITES).unwrap();
        let psi = basis_vector(NUM_SITES, 0);
        let a = cp.apply_ket(&cp.apply_ket(&psi, 0.3), 1.1);
        let b = cp.apply_ket(&psi, 1.4);
        assert!((a.norm() - 1.0).abs() < 1e-10);
        assert!((a - b).norm() < 1e-9);
    }
}
