//! Linear correlation coefficients between the optical and atomic modes, after the
//! first Raman process and at the interferometer output.

use crate::error::{Error, Result};
use crate::model::{compose_expansion, InterferometerParams};
use crate::moments::{cov_number_from, cov_quad_from, stats_from_expansion, Observable};

/// Slack beyond `|J| = 1` absorbed as round-off.
pub const LCC_CLAMP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LccReport {
    pub j_value: f64,
    pub cov: f64,
    pub var_a: f64,
    pub var_b: f64,
}

/// `cov / sqrt(var_a var_b)`.
pub fn lcc(cov: f64, var_a: f64, var_b: f64) -> Result<f64> {
    if !(var_a > 0.0 && var_b > 0.0) {
        return Err(Error::DegenerateMarginal { var_a, var_b });
    }
    let j = cov / (var_a * var_b).sqrt();
    if j.abs() <= 1.0 {
        Ok(j)
    } else if j.abs() <= 1.0 + LCC_CLAMP {
        Ok(j.signum())
    } else {
        Err(Error::CorrelationOutOfRange(j))
    }
}

fn report(cov: f64, var_a: f64, var_b: f64) -> Result<LccReport> {
    Ok(LccReport { j_value: lcc(cov, var_a, var_b)?, cov, var_a, var_b })
}

/// Correlations `(J_x1, J_y1, J_n1)` generated by the first Raman process from
/// `|alpha> (x) |0>`.
///
/// `J_n1` is taken as 0 at `g = 0`, where no pairs are scattered.
pub fn j_rp1(g: f64, theta1: f64, alpha_mag: f64) -> (f64, f64, f64) {
    let t = (2.0 * g).tanh();
    let jx = theta1.cos() * t;
    let jy = -jx;
    let jn = if g == 0.0 {
        0.0
    } else {
        let n = alpha_mag * alpha_mag;
        // 4 coth^2(2g) = 4 / tanh^2(2g)
        (1.0 + 2.0 * n) / (4.0 * (n + n * n) / (t * t) + 1.0).sqrt()
    };
    (jx, jy, jn)
}

/// Quadrature correlation `J(x_a2, x_b2)` at the output.
pub fn j_x2(params: &InterferometerParams) -> Result<LccReport> {
    let m = compose_expansion(params);
    let var_a = stats_from_expansion(params, &m, Observable::QuadXA2)?.variance;
    let var_b = stats_from_expansion(params, &m, Observable::QuadXB2)?.variance;
    report(cov_quad_from(&m), var_a, var_b)
}

/// Number correlation `J(n_a2, n_b2)` at the output.
pub fn j_n2(params: &InterferometerParams) -> Result<LccReport> {
    let m = compose_expansion(params);
    let var_a = stats_from_expansion(params, &m, Observable::NumA2)?.variance;
    let var_b = stats_from_expansion(params, &m, Observable::NumB2)?.variance;
    report(cov_number_from(params, &m), var_a, var_b)
}
