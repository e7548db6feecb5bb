//! First and second moments of the output quadratures and occupation numbers for a
//! coherent seed, with loss and atomic damping included.
//!
//! Quadratures use `x = (a + a^dag)/2`, `y = (a - a^dag)/2i`, so vacuum noise is 1/4.
//! Slopes are analytic `d/dphi` of the means.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{compose_expansion, InterferometerParams, ModeExpansion};

/// Round-off allowance below zero before a variance is treated as a formula error.
pub const VARIANCE_CLAMP: f64 = 1e-12;

/// Output observables of the interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observable {
    /// Amplitude quadrature of the optical output `a2`.
    QuadXA2,
    /// Phase quadrature of `a2`.
    QuadYA2,
    /// Amplitude quadrature of the atomic output `b2`.
    QuadXB2,
    QuadYB2,
    /// Photon number `a2^dag a2`.
    NumA2,
    /// Atomic excitation number `b2^dag b2`.
    NumB2,
}

impl Observable {
    pub const ALL: [Observable; 6] = [
        Observable::QuadXA2,
        Observable::QuadYA2,
        Observable::QuadXB2,
        Observable::QuadYB2,
        Observable::NumA2,
        Observable::NumB2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Observable::QuadXA2 => "x_a2",
            Observable::QuadYA2 => "y_a2",
            Observable::QuadXB2 => "x_b2",
            Observable::QuadYB2 => "y_b2",
            Observable::NumA2 => "n_a2",
            Observable::NumB2 => "n_b2",
        }
    }

    pub fn is_quadrature(&self) -> bool {
        !matches!(self, Observable::NumA2 | Observable::NumB2)
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Observable::ALL
            .iter()
            .copied()
            .find(|o| o.name() == s)
            .ok_or_else(|| format!("unknown observable `{s}`"))
    }
}

/// Mean, variance and phase slope of one observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableStats {
    pub mean: f64,
    pub variance: f64,
    /// `d<O>/dphi`.
    pub slope: f64,
}

pub(crate) fn checked_variance(v: f64) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v >= -VARIANCE_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::NegativeVariance(v))
    }
}

/// Shorthand for the magnitudes every second-moment formula needs.
struct Mags {
    n_alpha: f64,
    u1: f64,
    v1: f64,
    u2_big: f64,
    v2_big: f64,
    // |u2|^2, |v2|^2 of the second Raman process
    u2: f64,
    v2: f64,
    r: f64,
    lang: f64,
}

impl Mags {
    fn new(params: &InterferometerParams, m: &ModeExpansion) -> Self {
        Self {
            n_alpha: params.input.n_alpha(),
            u1: m.coeffs.direct_a.norm_sqr(),
            v1: m.coeffs.cross_a.norm_sqr(),
            u2_big: m.coeffs.direct_b.norm_sqr(),
            v2_big: m.coeffs.cross_b.norm_sqr(),
            u2: m.rp2_u.norm_sqr(),
            v2: m.rp2_v.norm_sqr(),
            r: m.reflectance,
            lang: m.lang_comm,
        }
    }
}

fn quad_variance_a(k: &Mags) -> f64 {
    0.25 * (k.u1 + k.v1 + k.r * k.u2 + k.lang * k.v2)
}

fn quad_variance_b(k: &Mags) -> f64 {
    0.25 * (k.u2_big + k.v2_big + k.r * k.v2 + k.lang * k.u2)
}

fn number_variance_a(k: &Mags) -> f64 {
    let na = k.n_alpha;
    k.u1 * k.u1 * na
        + k.u1 * k.v1 * (1.0 + na)
        + k.r * k.v1 * k.u2
        + k.r * k.u1 * k.u2 * na
        + k.u1 * k.v2 * k.lang * na
        + (k.u1 * k.v2 + k.r * k.u2 * k.v2) * k.lang
}

fn number_variance_b(k: &Mags) -> f64 {
    let na = k.n_alpha;
    k.v2_big * k.v2_big * na
        + k.u2_big * k.v2_big * (1.0 + na)
        + k.r * k.u2_big * k.v2
        + k.r * k.v2_big * k.v2 * na
        + k.v2_big * k.u2 * k.lang * na
        + (k.v2_big * k.u2 + k.r * k.u2 * k.v2) * k.lang
}

/// Statistics of any output observable.
pub fn observable_stats(params: &InterferometerParams, which: Observable) -> Result<ObservableStats> {
    let m = compose_expansion(params);
    stats_from_expansion(params, &m, which)
}

pub(crate) fn stats_from_expansion(
    params: &InterferometerParams,
    m: &ModeExpansion,
    which: Observable,
) -> Result<ObservableStats> {
    let k = Mags::new(params, m);
    let alpha = params.input.alpha();
    let c = &m.coeffs;
    let d = &m.coeffs_dphi;

    let stats = match which {
        Observable::QuadXA2 | Observable::QuadYA2 => {
            let mean = c.direct_a * alpha;
            let slope = d.direct_a * alpha;
            let variance = checked_variance(quad_variance_a(&k))?;
            if which == Observable::QuadXA2 {
                ObservableStats { mean: mean.re, variance, slope: slope.re }
            } else {
                ObservableStats { mean: mean.im, variance, slope: slope.im }
            }
        }
        Observable::QuadXB2 | Observable::QuadYB2 => {
            // <b2> = e^{-i phi} V2 alpha^*
            let mean = m.phase_b * c.cross_b * alpha.conj();
            let slope = m.phase_b * (d.cross_b - num_complex::Complex64::i() * c.cross_b) * alpha.conj();
            let variance = checked_variance(quad_variance_b(&k))?;
            if which == Observable::QuadXB2 {
                ObservableStats { mean: mean.re, variance, slope: slope.re }
            } else {
                ObservableStats { mean: mean.im, variance, slope: slope.im }
            }
        }
        Observable::NumA2 => {
            let mean = k.u1 * k.n_alpha + k.v1 + k.lang * k.v2;
            let slope = 2.0
                * ((c.direct_a.conj() * d.direct_a).re * k.n_alpha
                    + (c.cross_a.conj() * d.cross_a).re);
            let variance = checked_variance(number_variance_a(&k))?;
            ObservableStats { mean, variance, slope }
        }
        Observable::NumB2 => {
            let mean = k.v2_big * (k.n_alpha + 1.0) + k.r * k.v2;
            let slope = 2.0 * (c.cross_b.conj() * d.cross_b).re * (k.n_alpha + 1.0);
            let variance = checked_variance(number_variance_b(&k))?;
            ObservableStats { mean, variance, slope }
        }
    };
    Ok(stats)
}

/// Homodyne observable `x_a2`.
pub fn quad_stats_a2(params: &InterferometerParams) -> Result<ObservableStats> {
    observable_stats(params, Observable::QuadXA2)
}

/// Intensity observable `n_a2`.
pub fn number_stats_a2(params: &InterferometerParams) -> Result<ObservableStats> {
    observable_stats(params, Observable::NumA2)
}

pub fn number_stats_b2(params: &InterferometerParams) -> Result<ObservableStats> {
    observable_stats(params, Observable::NumB2)
}

/// Symmetrized covariance of `x_a2` and `x_b2`.
pub fn cov_quad(params: &InterferometerParams) -> f64 {
    cov_quad_from(&compose_expansion(params))
}

pub(crate) fn cov_quad_from(m: &ModeExpansion) -> f64 {
    let c = &m.coeffs;
    let env = m.rp2_u * m.rp2_v * (m.reflectance + m.lang_comm);
    0.25 * (m.phase_b * (c.cross_a * c.direct_b + c.direct_a * c.cross_b) + env).re
}

/// Covariance of `n_a2` and `n_b2`.
pub fn cov_number(params: &InterferometerParams) -> f64 {
    cov_number_from(params, &compose_expansion(params))
}

pub(crate) fn cov_number_from(params: &InterferometerParams, m: &ModeExpansion) -> f64 {
    let c = &m.coeffs;
    let na = params.input.n_alpha();
    let r = m.reflectance;
    let lang = m.lang_comm;
    let (u2, v2) = (m.rp2_u, m.rp2_v);
    let rot = m.phase_b.conj();

    (c.direct_a * c.cross_b).norm_sqr() * na
        + (1.0 + na) * (c.direct_a.conj() * c.direct_b * c.cross_a * c.cross_b.conj()).re
        + lang
            * (r * (u2 * v2).norm_sqr()
                + (1.0 + na) * (rot * c.direct_a.conj() * c.cross_b.conj() * u2 * v2).re)
        + r * (m.phase_b * c.direct_b * c.cross_a * u2.conj() * v2.conj()).re
        + r * na * (m.phase_b * c.direct_a * c.cross_b * u2.conj() * v2.conj()).re
}

/// Variance of `x_b2`.
pub fn quad_variance_b2(params: &InterferometerParams) -> f64 {
    let m = compose_expansion(params);
    quad_variance_b(&Mags::new(params, &m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CoherentInput, LossParams};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn balanced(g: f64, alpha: f64, theta_alpha: f64, t: f64, gt: f64, phi: f64) -> InterferometerParams {
        InterferometerParams::balanced(
            g,
            0.0,
            CoherentInput::new(alpha, theta_alpha).unwrap(),
            phi,
            LossParams::new(t, gt).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn vacuum_noise_at_transparent_point() {
        let s = quad_stats_a2(&balanced(2.0, 10.0, FRAC_PI_2, 1.0, 0.0, 0.0)).unwrap();
        assert!((s.variance - 0.25).abs() < 1e-12);
    }

    #[test]
    fn lossy_quad_variance_balanced_display() {
        // 1/4 [sinh^2(4)(0.4 - sqrt(0.8) e^{-0.1}) + 2 e^{-0.2} sinh^4(2) + cosh 4],
        // evaluated at 30 digits: 1.452307080219458...
        let s = quad_stats_a2(&balanced(2.0, 10.0, FRAC_PI_2, 0.8, 0.1, 0.0)).unwrap();
        assert!((s.variance - 1.452_307_080_219_458).abs() < 1e-12);
        for &phi in &[0.0, 0.4, 1.7, PI] {
            for &(t, gt) in &[(0.8, 0.1), (0.3, 0.7), (1.0, 0.0)] {
                let g: f64 = 1.3;
                let v = quad_stats_a2(&balanced(g, 1.0, 0.0, t, gt, phi)).unwrap().variance;
                let e = (-gt).exp();
                let display = 0.25
                    * ((2.0 * g).sinh().powi(2) * (t / 2.0 - t.sqrt() * e * phi.cos())
                        + 2.0 * e * e * g.sinh().powi(4)
                        + (2.0 * g).cosh());
                assert!((v - display).abs() < 1e-12 * display);
            }
        }
    }

    #[test]
    fn pass_through_interferometer() {
        for &(t, gt) in &[(1.0, 0.0), (0.6, 0.4)] {
            let p = balanced(0.0, 3.0, 0.2, t, gt, 0.7);
            let s = quad_stats_a2(&p).unwrap();
            assert!((s.variance - 0.25).abs() < 1e-15);
            assert!((s.mean - t.sqrt() * 3.0 * (0.7f64 + 0.2).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn homodyne_slope_balanced_form() {
        for &(t, gt, phi, ta) in &[(0.8, 0.1, 0.0, FRAC_PI_2), (0.5, 0.3, 0.4, 0.1), (1.0, 0.0, -1.2, 2.0)] {
            let g: f64 = 2.0;
            let s = quad_stats_a2(&balanced(g, 10.0, ta, t, gt, phi)).unwrap();
            let expected = (t * 100.0f64).sqrt() * g.cosh().powi(2) * (phi + ta).sin().abs();
            assert!((s.slope.abs() - expected).abs() < 1e-10 * expected.max(1.0));
        }
    }

    #[test]
    fn intensity_slope_balanced_form() {
        for &(t, gt, phi) in &[(0.8, 0.1, 0.3), (0.5, 0.3, 2.0), (1.0, 0.0, -0.062)] {
            let g: f64 = 2.0;
            let s = number_stats_a2(&balanced(g, 10.0, 0.3, t, gt, phi)).unwrap();
            let expected = 0.5 * t.sqrt() * (-gt).exp() * 101.0 * (2.0 * g).sinh().powi(2) * phi.sin().abs();
            assert!((s.slope.abs() - expected).abs() < 1e-10 * expected);
        }
    }

    #[test]
    fn number_examples() {
        let s = number_stats_a2(&balanced(2.0, 10.0, 0.0, 1.0, 0.0, 0.0)).unwrap();
        assert!((s.mean - 100.0).abs() < 1e-9);
        assert!((s.variance - 100.0).abs() < 1e-9);

        let s = number_stats_a2(&balanced(2.0, 0.0, 0.0, 1.0, 0.0, PI)).unwrap();
        assert!((s.mean - 744.739_580_626_089).abs() < 1e-6);

        let s = number_stats_a2(&balanced(0.0, 10.0, 0.0, 1.0, 0.0, 0.9)).unwrap();
        assert!((s.mean - 100.0).abs() < 1e-12);
        assert_eq!(s.slope, 0.0);

        let s = number_stats_b2(&balanced(2.0, 10.0, 0.0, 1.0, 0.0, 0.0)).unwrap();
        assert!(s.mean.abs() < 1e-9);
        let s = number_stats_b2(&balanced(2.0, 0.0, 0.0, 1.0, 0.0, PI)).unwrap();
        assert!((s.mean - 744.739_580_626_089).abs() < 1e-6);
    }

    #[test]
    fn lossy_balanced_number_variance_display() {
        // balanced lossy display with |U_b|^2, |V_b|^2 in place of the general magnitudes
        let g: f64 = 2.0;
        for &(t, gt, phi) in &[(0.8, 0.1, 0.062), (0.5, 0.4, 1.0)] {
            let p = balanced(g, 10.0, 0.0, t, gt, phi);
            let loss = p.loss;
            let (ub, vb) = crate::model::lossy_balanced_magnitudes(g, loss, phi);
            let a2 = 100.0;
            let r = 1.0 - t;
            let c2 = g.cosh().powi(2);
            let s2 = g.sinh().powi(2);
            let lang = 1.0 - (-2.0 * gt).exp();
            let display = ub * ub * a2
                + ub * vb * (1.0 + a2)
                + r * c2 * (ub * a2 + vb)
                + s2 * (ub * (1.0 + a2) + r * c2) * lang;
            let v = number_stats_a2(&p).unwrap().variance;
            assert!((v - display).abs() < 1e-10 * display);
        }
    }

    #[test]
    fn lossless_quad_variance_reduction() {
        for &g in &[0.3f64, 1.0, 2.0] {
            for &phi in &[0.0f64, 0.5, 2.0, PI] {
                let v = quad_stats_a2(&balanced(g, 1.0, 0.0, 1.0, 0.0, phi)).unwrap().variance;
                let ideal = 0.25 * ((2.0 * g).cosh().powi(2) - (2.0 * g).sinh().powi(2) * phi.cos());
                assert!((v - ideal).abs() < 1e-12 * ideal.max(1.0));
            }
        }
    }

    #[test]
    fn covariances_vanish_at_decorrelation_point() {
        let p = balanced(2.0, 10.0, FRAC_PI_2, 1.0, 0.0, 0.0);
        assert!(cov_quad(&p).abs() < 1e-12);
        assert!(cov_number(&p).abs() < 1e-9);
    }

    #[test]
    fn number_covariance_vacuum_input_at_pi() {
        // alpha = 0: cov = Re[U^* U V V^*] = |UV|^2
        let g: f64 = 1.0;
        let p = balanced(g, 0.0, 0.0, 1.0, 0.0, PI);
        let m = compose_expansion(&p);
        let uv = (m.coeffs.direct_a * m.coeffs.cross_a).norm_sqr();
        assert!((cov_number(&p) - uv).abs() < 1e-12 * uv);
        let va = number_stats_a2(&p).unwrap().variance;
        let vb = number_stats_b2(&p).unwrap().variance;
        assert!((cov_number(&p) / (va * vb).sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quad_covariance_at_pi_gives_tanh() {
        let g: f64 = 2.0;
        let p = balanced(g, 10.0, 0.0, 1.0, 0.0, PI);
        let va = quad_stats_a2(&p).unwrap().variance;
        let vb = quad_variance_b2(&p);
        let j = cov_quad(&p) / (va * vb).sqrt();
        assert!((j + (4.0 * g).tanh()).abs() < 1e-12);
    }

    #[test]
    fn negative_variance_policy() {
        assert_eq!(checked_variance(-5e-13), Ok(0.0));
        assert_eq!(checked_variance(0.3), Ok(0.3));
        assert!(matches!(checked_variance(-1e-6), Err(Error::NegativeVariance(_))));
    }

    #[test]
    fn observable_names_round_trip() {
        for o in Observable::ALL {
            assert_eq!(o.name().parse::<Observable>().unwrap(), o);
        }
        assert!("z_a2".parse::<Observable>().is_err());
    }
}
