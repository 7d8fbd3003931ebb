//! Dense matrix exponential: scaling-and-squaring with the diagonal Padé(13)
//! approximant and standard 1-norm based scaling.

use nalgebra::DMatrix;

use crate::{Error, Result};

// Padé(13) numerator coefficients b_0..b_13.
const B: [f64; 14] = [
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

// 1-norm threshold for the order-13 approximant.
const THETA_13: f64 = 5.371920351148152;

fn one_norm(a: &DMatrix<f64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Computes `exp(A)` for a square matrix.
pub fn expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expm needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("expm input has non-finite entries".into()));
    }

    let norm = one_norm(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let a_scaled = a / 2f64.powi(s as i32);

    let eye = DMatrix::<f64>::identity(n, n);
    let a2 = &a_scaled * &a_scaled;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let w1 = &a6 * B[13] + &a4 * B[11] + &a2 * B[9];
    let w2 = &a6 * B[7] + &a4 * B[5] + &a2 * B[3] + &eye * B[1];
    let u = &a_scaled * (&a6 * &w1 + w2);

    let z1 = &a6 * B[12] + &a4 * B[10] + &a2 * B[8];
    let z2 = &a6 * B[6] + &a4 * B[4] + &a2 * B[2] + &eye * B[0];
    let v = &a6 * z1 + z2;

    let denom = &v - &u;
    let numer = &v + &u;
    let mut x = denom
        .lu()
        .solve(&numer)
        .ok_or_else(|| Error::Numerical("expm Padé denominator is singular".into()))?;

    for _ in 0..s {
        x = &x * &x;
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("expm produced non-finite entries".into()));
    }
    Ok(x)
}
