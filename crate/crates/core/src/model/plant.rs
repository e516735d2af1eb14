use serde::Serialize;

use super::{AgcParams, ModelError};
use crate::numerics::{mat_exp, Matrix};

/// Number of plant states: (Δω, ΔP_m, ΔP_v, ΔP_ref).
pub const STATES: usize = 4;
/// Number of measured outputs: (Δω, ΔP_ref).
pub const OUTPUTS: usize = 2;

/// Continuous-time AGC plant `ẋ = A_c x + B_c ΔP_L`, `y = C_c x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuousStateSpace {
    pub a_c: Matrix,
    pub b_c: Matrix,
    pub c_c: Matrix,
}

/// Output map selecting speed deviation and reference power.
pub fn output_matrix() -> Matrix {
    Matrix::from_rows(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 1.0]])
}

pub fn build_continuous(params: &AgcParams) -> Result<ContinuousStateSpace, ModelError> {
    params.validate()?;
    let AgcParams {
        d,
        r,
        h,
        t_tr,
        t_g,
        k_ref,
        ..
    } = *params;
    let sign = params.governor_sign.factor();
    let a_c = Matrix::from_rows(&[
        &[-d / (2.0 * h), 1.0 / (2.0 * h), 0.0, 0.0],
        &[0.0, -1.0 / t_tr, 1.0 / t_tr, 0.0],
        &[sign / (r * t_g), 0.0, -1.0 / t_g, 1.0 / t_g],
        &[-k_ref, 0.0, 0.0, 0.0],
    ]);
    let b_c = Matrix::column(&[-1.0 / (2.0 * h), 0.0, 0.0, 0.0]);
    Ok(ContinuousStateSpace {
        a_c,
        b_c,
        c_c: output_matrix(),
    })
}

/// Zero-order-hold discretization `(A, B, C, D_ff)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Discretized {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d_ff: Matrix,
}

/// Exact ZOH discretization via `exp([[A_c, B_c], [0, 0]]·Ts)`.
pub fn discretize_zoh(css: &ContinuousStateSpace, ts: f64) -> Result<Discretized, ModelError> {
    if !(ts.is_finite() && ts > 0.0) {
        return Err(ModelError::InvalidParam {
            field: "sampling_period_s",
            reason: format!("must be finite and > 0, got {ts}"),
        });
    }
    let n = css.a_c.rows();
    let m = css.b_c.cols();
    let mut aug = Matrix::zeros(n + m, n + m);
    aug.set_block(0, 0, &css.a_c);
    aug.set_block(0, n, &css.b_c);
    let e = mat_exp(&aug.scale(ts))?;
    let a = e.block(0, 0, n, n);
    let b = e.block(0, n, n, m);
    if !(a.is_finite() && b.is_finite()) {
        return Err(ModelError::NonFiniteDiscretization);
    }
    Ok(Discretized {
        a,
        b,
        c: css.c_c.clone(),
        d_ff: Matrix::zeros(css.c_c.rows(), m),
    })
}
