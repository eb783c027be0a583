//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants (Higham, SIAM J. Matrix Anal. Appl. 26, 2005).

use crate::linalg::{identity, ComplexMatrix, C64};

// Largest 1-norm for which the [m/m] approximant meets unit roundoff.
const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_230e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068e0;
const THETA_13: f64 = 5.371_920_351_148_152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] =
    [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Induced 1-norm (max column sum).
pub fn norm1(a: &ComplexMatrix) -> f64 {
    a.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `exp(A)` for a square complex matrix.
pub fn expm(a: &ComplexMatrix) -> ComplexMatrix {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let norm = norm1(a);
    if !norm.is_finite() {
        return ComplexMatrix::from_element(n, n, C64::new(f64::NAN, f64::NAN));
    }

    let a2 = a * a;
    if norm <= THETA_3 {
        return low_order(a, &a2, &B3);
    }
    if norm <= THETA_5 {
        return low_order(a, &a2, &B5);
    }
    if norm <= THETA_7 {
        return low_order(a, &a2, &B7);
    }
    if norm <= THETA_9 {
        return low_order(a, &a2, &B9);
    }

    let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
    let scaled = a.scale(0.5f64.powi(s));
    let mut x = pade13(&scaled);
    for _ in 0..s {
        x = &x * &x;
    }
    x
}

/// [m/m] approximant for m ≤ 9 from even powers of `a`.
fn low_order(a: &ComplexMatrix, a2: &ComplexMatrix, b: &[f64]) -> ComplexMatrix {
    let n = a.nrows();
    let id = identity(n);
    let mut u = id.scale(b[1]);
    let mut v = id.scale(b[0]);
    let mut power = id;
    for k in 1..b.len() / 2 {
        power = &power * a2;
        u += power.scale(b[2 * k + 1]);
        v += power.scale(b[2 * k]);
    }
    let u = a * u;
    solve_pade(&u, &v)
}

fn pade13(a: &ComplexMatrix) -> ComplexMatrix {
    let id = identity(a.nrows());
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;

    let inner_u = a6.scale(b[13]) + a4.scale(b[11]) + a2.scale(b[9]);
    let u = a * (&a6 * inner_u + a6.scale(b[7]) + a4.scale(b[5]) + a2.scale(b[3]) + id.scale(b[1]));

    let inner_v = a6.scale(b[12]) + a4.scale(b[10]) + a2.scale(b[8]);
    let v = &a6 * inner_v + a6.scale(b[6]) + a4.scale(b[4]) + a2.scale(b[2]) + id.scale(b[0]);
    solve_pade(&u, &v)
}

/// Solves `(V − U)·X = V + U`.
fn solve_pade(u: &ComplexMatrix, v: &ComplexMatrix) -> ComplexMatrix {
    let p = v + u;
    let q = v - u;
    q.lu().solve(&p).expect("Padé denominator is nonsingular for the chosen scaling")
}
