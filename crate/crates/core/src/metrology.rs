//! Error-propagation phase sensitivity, signal-to-noise ratio and the standard
//! quantum limit for homodyne and intensity detection of the optical output.

use crate::error::{Error, Result};
use crate::model::InterferometerParams;
use crate::moments::{observable_stats, Observable, ObservableStats};

/// Slopes smaller than this fraction of `|mean| + std` are round-off of an exact zero.
pub const ZERO_SLOPE: f64 = 1e-12;

/// Grid resolution of [`optimize_phase`] before golden-section refinement.
pub const SCAN_POINTS: usize = 4001;

/// Final bracket width of the golden-section refinement.
pub const REFINE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectionScheme {
    /// Homodyne detection of `x_a2`.
    Homodyne,
    /// Intensity detection of `n_a2`.
    Intensity,
}

impl DetectionScheme {
    pub fn observable(&self) -> Observable {
        match self {
            DetectionScheme::Homodyne => Observable::QuadXA2,
            DetectionScheme::Intensity => Observable::NumA2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityReport {
    pub scheme: DetectionScheme,
    /// `f64::INFINITY` where the slope vanishes.
    pub delta_phi: f64,
    /// `|SNR|`.
    pub snr: f64,
    /// Phase-sensing probe number.
    pub n_ph: f64,
    /// `1/sqrt(n_ph)`.
    pub sql: f64,
    pub beats_sql: bool,
    pub stats: ObservableStats,
}

/// `sqrt(var) / |slope|`, or `+inf` when the slope vanishes.
pub fn sensitivity(stats: &ObservableStats) -> f64 {
    let slope = stats.slope.abs();
    let scale = stats.mean.abs() + stats.variance.max(0.0).sqrt();
    if slope <= ZERO_SLOPE * scale {
        f64::INFINITY
    } else {
        stats.variance.max(0.0).sqrt() / slope
    }
}

/// Signed `mean / sqrt(var)`.
pub fn snr(stats: &ObservableStats) -> Result<f64> {
    if stats.variance <= 0.0 {
        return Err(Error::DegenerateNoise);
    }
    Ok(stats.mean / stats.variance.sqrt())
}

/// Photon number of the phase-carrying arm after the first Raman process,
/// `N_alpha cosh^2 g1 + sinh^2 g1`. Loss is not applied.
pub fn phase_sensing_number(params: &InterferometerParams) -> f64 {
    let g = params.rp1.g();
    params.input.n_alpha() * g.cosh().powi(2) + g.sinh().powi(2)
}

pub fn report(params: &InterferometerParams, scheme: DetectionScheme) -> Result<SensitivityReport> {
    let stats = observable_stats(params, scheme.observable())?;
    let delta_phi = sensitivity(&stats);
    let snr = snr(&stats)?.abs();
    let n_ph = phase_sensing_number(params);
    let sql = 1.0 / n_ph.sqrt();
    Ok(SensitivityReport {
        scheme,
        delta_phi,
        snr,
        n_ph,
        sql,
        beats_sql: delta_phi < sql,
        stats,
    })
}

pub fn hd_report(params: &InterferometerParams) -> Result<SensitivityReport> {
    report(params, DetectionScheme::Homodyne)
}

pub fn id_report(params: &InterferometerParams) -> Result<SensitivityReport> {
    report(params, DetectionScheme::Intensity)
}

fn delta_phi_at(params: &InterferometerParams, scheme: DetectionScheme, phi: f64) -> f64 {
    match observable_stats(&params.with_phi(phi), scheme.observable()) {
        Ok(s) => sensitivity(&s),
        Err(_) => f64::INFINITY,
    }
}

/// Golden-section search for a minimum of `f` on `[a, b]`, stopping when the bracket
/// is narrower than `tol`. Returns `(x_min, f_min)`.
pub fn golden_section_minimize(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a) > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Working point of minimal `delta_phi` over `phi` in `[lo, hi]`.
///
/// A dense scan picks the best grid cell; golden-section search then refines inside
/// the two neighbouring cells. `params.phi` is ignored. Deterministic.
pub fn optimize_phase(
    scheme: DetectionScheme,
    params: &InterferometerParams,
    bracket: (f64, f64),
) -> Result<(f64, f64)> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(crate::error::invalid("bracket", format!("need finite lo < hi, got ({lo}, {hi})")));
    }
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let grid = |i: usize| if i == SCAN_POINTS - 1 { hi } else { lo + step * i as f64 };

    let mut best: Option<(usize, f64)> = None;
    for i in 0..SCAN_POINTS {
        let d = delta_phi_at(params, scheme, grid(i));
        if d.is_finite() && best.is_none_or(|(_, b)| d < b) {
            best = Some((i, d));
        }
    }
    let (i_best, d_best) = best.ok_or(Error::NoFiniteSensitivity { lo, hi })?;

    let a = grid(i_best.saturating_sub(1));
    let b = grid((i_best + 1).min(SCAN_POINTS - 1));
    let (x, fx) = golden_section_minimize(|phi| delta_phi_at(params, scheme, phi), a, b, REFINE_TOL);
    if fx <= d_best {
        Ok((x, fx))
    } else {
        Ok((grid(i_best), d_best))
    }
}
