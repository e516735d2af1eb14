use super::{Matrix, NumericsError};

const TAYLOR_DEGREE: usize = 13;
const SCALED_NORM: f64 = 0.5;

/// Matrix exponential by scaling and squaring around a degree-13 Taylor core.
///
/// The input is scaled by `2^-s` until its 1-norm is at most 0.5, the series is
/// evaluated with Horner's scheme, and the result is squared `s` times.
pub fn mat_exp(m: &Matrix) -> Result<Matrix, NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::NotSquare(m.shape()));
    }
    if !m.is_finite() {
        return Err(NumericsError::NonFinite("mat_exp"));
    }
    let n = m.rows();
    let norm = m.norm_1();
    let mut squarings = 0u32;
    if norm > SCALED_NORM {
        squarings = (norm / SCALED_NORM).log2().ceil() as u32;
    }
    let scaled = m.scale(0.5f64.powi(squarings as i32));

    let id = Matrix::identity(n);
    let mut acc = id.clone();
    for k in (1..=TAYLOR_DEGREE).rev() {
        acc = id.add(&scaled.mul(&acc).scale(1.0 / k as f64));
    }
    for _ in 0..squarings {
        acc = acc.mul(&acc);
    }
    if !acc.is_finite() {
        return Err(NumericsError::NonFinite("mat_exp"));
    }
    Ok(acc)
}
