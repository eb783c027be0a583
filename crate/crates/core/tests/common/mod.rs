#![allow(dead_code)]

use lgfmo_core::linalg::{hermiticity_error, trace};
use lgfmo_core::{
    build_default_hamiltonian, build_default_model, perturb_hamiltonian, Clock, ComplexMatrix, ComplexVector,
    DensityOperator, LindbladModel, C64, NUM_SITES,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn normal_c64<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_ket<R: Rng>(rng: &mut R, dim: usize) -> ComplexVector {
    let v = ComplexVector::from_fn(dim, |_, _| normal_c64(rng));
    let n = v.norm();
    v / C64::new(n, 0.0)
}

/// Ginibre-distributed mixed state `GG†/Tr(GG†)`.
pub fn random_density<R: Rng>(rng: &mut R, dim: usize) -> DensityOperator {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| normal_c64(rng));
    let m = &g * g.adjoint();
    let m = &m / trace(&m);
    let m = (&m + m.adjoint()).scale(0.5);
    assert!(hermiticity_error(&m) == 0.0);
    DensityOperator::new(m).expect("Ginibre states are valid")
}

/// Perturbed Hamiltonian plus random dephasing, sink and recombination rates.
pub fn random_model<R: Rng>(rng: &mut R) -> LindbladModel {
    let h = perturb_hamiltonian(&build_default_hamiltonian(), 25.0, rng.random()).unwrap();
    let mut gammas = [0.0; NUM_SITES];
    for g in &mut gammas {
        *g = rng.random_range(0.0..15.0);
    }
    let clock = if rng.random_bool(0.5) { Clock::Published } else { Clock::Angular };
    build_default_model()
        .with_hamiltonian(h)
        .with_clock(clock)
        .with_site_dephasing(gammas)
        .unwrap()
        .with_sink_rate(rng.random_range(0.0..10.0))
        .unwrap()
        .with_recombination_wavenumber(rng.random_range(0.0..0.1))
        .unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Fixed-step classical RK4 on the master equation, written against the
/// direct superoperator formulas rather than the Liouvillian.
pub fn rk4_propagate(model: &LindbladModel, rho: &ComplexMatrix, t: f64, h: f64) -> ComplexMatrix {
    let f = |x: &ComplexMatrix| lgfmo_core::dynamics::master_equation_rhs(model, x).unwrap();
    let steps = (t / h).round() as usize;
    let mut x = rho.clone();
    let half = C64::new(h / 2.0, 0.0);
    let full = C64::new(h, 0.0);
    for _ in 0..steps {
        let k1 = f(&x);
        let k2 = f(&(&x + &k1 * half));
        let k3 = f(&(&x + &k2 * half));
        let k4 = f(&(&x + &k3 * full));
        x += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
    }
    x
}

/// Two-time correlator by explicit projective collapse:
/// `Σ_{a,b=±1} a·b·Tr[P_b N(P_a ρ P_a)]`.
pub fn branch_collapse_correlator<E: lgfmo_core::Evolution>(
    evolution: &E,
    p1: &ComplexMatrix,
    p2: &ComplexMatrix,
    rho: &ComplexMatrix,
    dt: f64,
) -> f64 {
    let dim = rho.nrows();
    let id = ComplexMatrix::identity(dim, dim);
    let branches1 = [(1.0, p1.clone()), (-1.0, &id - p1)];
    let branches2 = [(1.0, p2.clone()), (-1.0, &id - p2)];
    let mut total = 0.0;
    for (a, pa) in &branches1 {
        let collapsed = pa * rho * pa;
        let evolved = evolution.evolve(&collapsed, dt).unwrap();
        for (b, pb) in &branches2 {
            total += a * b * trace(&(pb * &evolved)).re;
        }
    }
    total
}
