//! Brute-force cross-check of the closed forms: the interferometer is simulated on a
//! truncated two-mode Fock space and every moment is measured from the state.

mod expm;
mod state;

pub use expm::{expm, ExpmScalar};
pub use state::{FockMoments, Mode, TruncatedState, DEFAULT_BUDGET};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::InterferometerParams;
use crate::moments::{checked_variance, Observable, ObservableStats};

/// Phase step of the central difference used for slopes.
pub const SLOPE_STEP: f64 = 1e-4;

/// Deficit the auto-cutoff driver aims for. Moment errors scale like `deficit * cutoff^2`;
/// round-off in the trace bookkeeping sits near 1e-14.
pub const AUTO_DEFICIT_TARGET: f64 = 1e-12;

/// Largest cutoff the auto-cutoff driver will try.
pub const MAX_AUTO_CUTOFF: usize = 320;

/// Pairs whose covariance the oracle reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovPair {
    /// `(x_a2, x_b2)`.
    Quadrature,
    /// `(n_a2, n_b2)`.
    Number,
}

/// State after the first Raman process; the phase-independent half of the pipeline.
pub fn first_stage(params: &InterferometerParams, cutoff: usize, budget: f64) -> Result<TruncatedState> {
    TruncatedState::coherent_vacuum(params.input.alpha(), cutoff)?
        .with_budget(budget)
        .with_coherence_band(2)
        .two_mode_squeeze(params.rp1.g(), params.rp1.theta())
}

/// Phase, loss, damping and the second Raman process applied to a first-stage state.
pub fn second_stage(state: TruncatedState, params: &InterferometerParams, phi: f64) -> Result<TruncatedState> {
    state
        .phase_shift_a(phi)
        .amplitude_damp(Mode::A, params.loss.transmissivity())?
        .amplitude_damp(Mode::B, (-2.0 * params.loss.gamma_tau()).exp())?
        .two_mode_squeeze(params.rp2.g(), params.rp2.theta())
}

/// State after the full pipeline `RP1 -> phase, loss, damping -> RP2`. Only coherences
/// needed for moments up to second order are kept.
pub fn propagate(params: &InterferometerParams, cutoff: usize, budget: f64) -> Result<TruncatedState> {
    second_stage(first_stage(params, cutoff, budget)?, params, params.phi)
}

/// Mean and second moment of an observable.
pub fn first_two(m: &FockMoments, which: Observable) -> (f64, f64) {
    // x = (c + c^dag)/2, y = (c - c^dag)/2i, with c c^dag = n + 1
    let quad = |c: Complex64, c_sq: Complex64, n: f64, imag: bool| {
        if imag {
            (c.im, 0.25 * (2.0 * n + 1.0 - 2.0 * c_sq.re))
        } else {
            (c.re, 0.25 * (2.0 * n + 1.0 + 2.0 * c_sq.re))
        }
    };
    match which {
        Observable::QuadXA2 => quad(m.a, m.a_sq, m.n_a, false),
        Observable::QuadYA2 => quad(m.a, m.a_sq, m.n_a, true),
        Observable::QuadXB2 => quad(m.b, m.b_sq, m.n_b, false),
        Observable::QuadYB2 => quad(m.b, m.b_sq, m.n_b, true),
        Observable::NumA2 => (m.n_a, m.n_a_sq),
        Observable::NumB2 => (m.n_b, m.n_b_sq),
    }
}

pub fn covariance(m: &FockMoments, pair: CovPair) -> f64 {
    match pair {
        CovPair::Quadrature => 0.5 * (m.ab + m.a_bdag).re - m.a.re * m.b.re,
        CovPair::Number => m.n_a_n_b - m.n_a * m.n_b,
    }
}

/// Everything the oracle measures at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub cutoff: usize,
    /// Largest trace deficit over the runs that went into the report.
    pub trace_deficit: f64,
    pub moments: FockMoments,
    /// Indexed like [`Observable::ALL`].
    pub stats: [ObservableStats; 6],
    pub cov_quad: f64,
    pub cov_number: f64,
}

impl OracleReport {
    pub fn stats(&self, which: Observable) -> ObservableStats {
        let i = Observable::ALL.iter().position(|&o| o == which).unwrap_or(0);
        self.stats[i]
    }

    pub fn cov(&self, pair: CovPair) -> f64 {
        match pair {
            CovPair::Quadrature => self.cov_quad,
            CovPair::Number => self.cov_number,
        }
    }
}

/// Three pipeline runs at `phi` and `phi +- SLOPE_STEP`.
pub fn oracle_report(params: &InterferometerParams, cutoff: usize, budget: f64) -> Result<OracleReport> {
    let start = first_stage(params, cutoff, budget)?;
    let plus = second_stage(start.clone(), params, params.phi + SLOPE_STEP)?;
    let minus = second_stage(start.clone(), params, params.phi - SLOPE_STEP)?;
    let centre = second_stage(start, params, params.phi)?;
    let (m, mp, mm) = (centre.moments(), plus.moments(), minus.moments());

    let mut stats = [ObservableStats { mean: 0.0, variance: 0.0, slope: 0.0 }; 6];
    for (slot, &which) in stats.iter_mut().zip(Observable::ALL.iter()) {
        let (mean, second) = first_two(&m, which);
        let slope = (first_two(&mp, which).0 - first_two(&mm, which).0) / (2.0 * SLOPE_STEP);
        *slot = ObservableStats { mean, variance: checked_variance(second - mean * mean)?, slope };
    }
    let trace_deficit = centre.trace_deficit().max(plus.trace_deficit()).max(minus.trace_deficit());
    Ok(OracleReport {
        cutoff,
        trace_deficit,
        moments: m,
        stats,
        cov_quad: covariance(&m, CovPair::Quadrature),
        cov_number: covariance(&m, CovPair::Number),
    })
}

/// Oracle statistics with `cutoff` as the starting truncation, raised as needed to reach
/// [`AUTO_DEFICIT_TARGET`].
pub fn oracle_stats(params: &InterferometerParams, cutoff: usize, which: Observable) -> Result<ObservableStats> {
    Ok(oracle_report_auto(params, cutoff, AUTO_DEFICIT_TARGET, MAX_AUTO_CUTOFF)?.stats(which))
}

/// Covariance of one output pair, with the same cutoff policy as [`oracle_stats`].
pub fn oracle_cov(params: &InterferometerParams, cutoff: usize, pair: CovPair) -> Result<f64> {
    Ok(oracle_report_auto(params, cutoff, AUTO_DEFICIT_TARGET, MAX_AUTO_CUTOFF)?.cov(pair))
}

/// Smallest cutoff the coherent input tolerates, with a margin for its Poisson tail.
pub fn initial_cutoff(params: &InterferometerParams) -> usize {
    let a = params.input.alpha_mag();
    ((a * a + 6.0 * a + 10.0).ceil() as usize).max(16)
}

/// Start at `cutoff` (or the input's minimum, if larger) and raise it by half each round
/// until the trace deficit drops below `target`.
pub fn oracle_report_auto(
    params: &InterferometerParams,
    cutoff: usize,
    target: f64,
    max_cutoff: usize,
) -> Result<OracleReport> {
    let mut cutoff = cutoff.max(initial_cutoff(params)).min(max_cutoff);
    loop {
        let attempt = oracle_report(params, cutoff, f64::INFINITY)?;
        if attempt.trace_deficit <= target {
            return Ok(attempt);
        }
        if cutoff >= max_cutoff {
            return Err(Error::TruncationOverflow { deficit: attempt.trace_deficit, budget: target, cutoff });
        }
        cutoff = (cutoff + cutoff / 2).min(max_cutoff);
    }
}
