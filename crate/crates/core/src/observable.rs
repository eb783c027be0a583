use std::fmt;

use serde::{Deserialize, Serialize};

use crate::basis::{StateLabel, FULL_DIM, NUM_SITES};
use crate::error::{Error, Result};
use crate::linalg::{basis_vector, identity, outer, ComplexMatrix, ComplexVector};

pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObservableLabel {
    Site(usize),
    Exciton(usize),
    Custom(String),
}

impl fmt::Display for ObservableLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObservableLabel::Site(m) => write!(f, "site{m}"),
            ObservableLabel::Exciton(m) => write!(f, "exciton{m}"),
            ObservableLabel::Custom(s) => f.write_str(s),
        }
    }
}

/// The ±1 observable `Q = 2P − I` answering "is the system in |ψ⟩?",
/// with `P = |ψ⟩⟨ψ|`.
#[derive(Debug, Clone, PartialEq)]
pub struct DichotomicObservable {
    projector: ComplexMatrix,
    label: ObservableLabel,
}

impl DichotomicObservable {
    pub fn projector(&self) -> &ComplexMatrix {
        &self.projector
    }

    pub fn label(&self) -> &ObservableLabel {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.projector.nrows()
    }

    /// `Q = 2P − I`
    pub fn q(&self) -> ComplexMatrix {
        self.projector.scale(2.0) - identity(self.dim())
    }

    /// Embeds a sites-only observable into the nine-level space. The
    /// ground and sink states land in the −1 outcome.
    pub fn embed_full(&self) -> Result<DichotomicObservable> {
        match self.dim() {
            FULL_DIM => Ok(self.clone()),
            NUM_SITES => {
                let mut p = ComplexMatrix::zeros(FULL_DIM, FULL_DIM);
                p.view_mut((1, 1), (NUM_SITES, NUM_SITES)).copy_from(&self.projector);
                Ok(DichotomicObservable { projector: p, label: self.label.clone() })
            }
            d => Err(Error::DimensionMismatch { expected: FULL_DIM, found: d }),
        }
    }
}

/// `Q_{|m⟩}` for a chromophore site in a 7- or 9-dimensional space.
pub fn make_site_observable(m: StateLabel, dim: usize) -> Result<DichotomicObservable> {
    let site = m.site_index().ok_or_else(|| Error::NotASite(m.to_string()))?;
    let index = m.index_in(dim)?;
    Ok(DichotomicObservable { projector: outer(&basis_vector(dim, index)), label: ObservableLabel::Site(site) })
}

/// `Q_{|ψ⟩}` for a normalized state vector.
pub fn make_state_observable(psi: &ComplexVector, label: ObservableLabel) -> Result<DichotomicObservable> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { norm });
    }
    Ok(DichotomicObservable { projector: outer(psi), label })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, max_abs_diff, trace, C64};

    #[test]
    fn site_projector_in_full_space() {
        let q = make_site_observable(StateLabel::Site(3), 9).unwrap();
        let p = q.projector();
        for i in 0..9 {
            for j in 0..9 {
                let expected = if i == 3 && j == 3 { 1.0 } else { 0.0 };
                assert_eq!(p[(i, j)], C64::new(expected, 0.0));
            }
        }
        assert!((trace(&q.q()).re + 7.0).abs() < 1e-15);
        let eig = hermitian_eigenvalues(&q.q());
        assert_eq!(eig.iter().filter(|&&e| (e + 1.0).abs() < 1e-12).count(), 8);
        assert_eq!(eig.iter().filter(|&&e| (e - 1.0).abs() < 1e-12).count(), 1);
    }

    #[test]
    fn ground_and_sink_rejected() {
        assert!(matches!(make_site_observable(StateLabel::Ground, 9), Err(Error::NotASite(_))));
        assert!(matches!(make_site_observable(StateLabel::Sink, 9), Err(Error::NotASite(_))));
    }

    #[test]
    fn basis_state_matches_site_observable() {
        let a = make_state_observable(&basis_vector(7, 0), ObservableLabel::Site(1)).unwrap();
        let b = make_site_observable(StateLabel::Site(1), 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn superposition_has_four_halves() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = (basis_vector(7, 0) + basis_vector(7, 5)) * C64::new(s, 0.0);
        let q = make_state_observable(&psi, ObservableLabel::Custom("1+6".into())).unwrap();
        let halves = q.projector().iter().filter(|z| (z.re - 0.5).abs() < 1e-15).count();
        let zeros = q.projector().iter().filter(|z| z.norm() < 1e-15).count();
        assert_eq!((halves, zeros), (4, 45));
    }

    #[test]
    fn unnormalized_rejected() {
        let psi = basis_vector(7, 0) * C64::new(1.1, 0.0);
        assert!(matches!(
            make_state_observable(&psi, ObservableLabel::Custom("x".into())),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn embedding_keeps_projector_block() {
        let q7 = make_site_observable(StateLabel::Site(5), 7).unwrap();
        let q9 = make_site_observable(StateLabel::Site(5), 9).unwrap();
        assert_eq!(q7.embed_full().unwrap(), q9);
    }

    proptest::proptest! {
        #[test]
        fn q_squares_to_identity(v in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9)) {
            let psi = ComplexVector::from_iterator(9, v.iter().map(|&(r, i)| C64::new(r, i)));
            proptest::prop_assume!(psi.norm() > 1e-3);
            let psi = psi.normalize();
            let obs = make_state_observable(&psi, ObservableLabel::Custom("r".into())).unwrap();
            let p = obs.projector();
            proptest::prop_assert!(max_abs_diff(&(p * p), p) <= 1e-12);
            proptest::prop_assert!(max_abs_diff(&p.adjoint(), p) <= 1e-12);
            let q = obs.q();
            proptest::prop_assert!(max_abs_diff(&(&q * &q), &identity(9)) <= 1e-12);
        }
    }
}
