//! Experiment parameters and the Bogoliubov expansion of the interferometer outputs.
//!
//! Two Raman processes act as nonlinear beam splitters between an optical Stokes
//! mode `a` and a collective atomic mode `b`. Between them the optical arm picks
//! up the phase `phi` and passes a beam splitter of transmissivity `T`, while the
//! atomic arm is damped by `exp(-gamma_tau)` with a matching Langevin noise term.
//! Every quantity the rest of the crate computes is a function of the
//! [`ModeExpansion`] built here.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

const BALANCE_TOL: f64 = 1e-12;

fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn require_finite(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite, got {x}")))
    }
}

/// A single Raman (two-mode squeezing) process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanGain {
    g: f64,
    theta: f64,
}

impl RamanGain {
    /// `g` is the dimensionless gain, `theta` the pump phase in radians. The phase is
    /// stored reduced to `[0, 2pi)`.
    pub fn new(g: f64, theta: f64) -> Result<Self> {
        require_finite("g", g)?;
        require_finite("theta", theta)?;
        if g < 0.0 {
            return Err(invalid("g", format!("gain must be non-negative, got {g}")));
        }
        Ok(Self { g, theta: reduce_angle(theta) })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Bogoliubov coefficients `(u, v)` with `a -> u a + v b^dag`.
    pub fn coeffs(&self) -> (Complex64, Complex64) {
        raman_coeffs(*self)
    }
}

/// `u = cosh g`, `v = e^{i theta} sinh g`.
pub fn raman_coeffs(gain: RamanGain) -> (Complex64, Complex64) {
    let u = Complex64::new(gain.g.cosh(), 0.0);
    let v = Complex64::from_polar(gain.g.sinh(), gain.theta);
    (u, v)
}

/// Coherent seed `|alpha>` injected into the optical input; the atomic input is vacuum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentInput {
    alpha_mag: f64,
    theta_alpha: f64,
}

impl CoherentInput {
    pub fn new(alpha_mag: f64, theta_alpha: f64) -> Result<Self> {
        require_finite("alpha_mag", alpha_mag)?;
        require_finite("theta_alpha", theta_alpha)?;
        if alpha_mag < 0.0 {
            return Err(invalid("alpha_mag", format!("must be non-negative, got {alpha_mag}")));
        }
        Ok(Self { alpha_mag, theta_alpha })
    }

    pub fn vacuum() -> Self {
        Self { alpha_mag: 0.0, theta_alpha: 0.0 }
    }

    pub fn alpha_mag(&self) -> f64 {
        self.alpha_mag
    }

    pub fn theta_alpha(&self) -> f64 {
        self.theta_alpha
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::from_polar(self.alpha_mag, self.theta_alpha)
    }

    /// Mean photon number `|alpha|^2`.
    pub fn n_alpha(&self) -> f64 {
        self.alpha_mag * self.alpha_mag
    }
}

/// Optical transmissivity and atomic damping exponent between the two Raman processes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParams {
    transmissivity: f64,
    gamma_tau: f64,
}

impl LossParams {
    pub fn new(transmissivity: f64, gamma_tau: f64) -> Result<Self> {
        require_finite("T", transmissivity)?;
        require_finite("gamma_tau", gamma_tau)?;
        if !(0.0..=1.0).contains(&transmissivity) {
            return Err(invalid("T", format!("transmissivity must lie in [0, 1], got {transmissivity}")));
        }
        if gamma_tau < 0.0 {
            return Err(invalid("gamma_tau", format!("must be non-negative, got {gamma_tau}")));
        }
        Ok(Self { transmissivity, gamma_tau })
    }

    pub const fn lossless() -> Self {
        Self { transmissivity: 1.0, gamma_tau: 0.0 }
    }

    pub fn transmissivity(&self) -> f64 {
        self.transmissivity
    }

    pub fn gamma_tau(&self) -> f64 {
        self.gamma_tau
    }

    /// `R = 1 - T`.
    pub fn reflectance(&self) -> f64 {
        1.0 - self.transmissivity
    }

    /// Amplitude damping factor `exp(-gamma_tau)` of the atomic arm.
    pub fn damping(&self) -> f64 {
        (-self.gamma_tau).exp()
    }

    /// `<F F^dag> = 1 - exp(-2 gamma_tau)`, the commutator carried by the Langevin term.
    pub fn langevin_strength(&self) -> f64 {
        -(-2.0 * self.gamma_tau).exp_m1()
    }

    pub fn is_lossless(&self) -> bool {
        self.transmissivity == 1.0 && self.gamma_tau == 0.0
    }
}

impl Default for LossParams {
    fn default() -> Self {
        Self::lossless()
    }
}

/// Full configuration of one interferometer run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerParams {
    pub rp1: RamanGain,
    pub rp2: RamanGain,
    pub input: CoherentInput,
    pub phi: f64,
    pub loss: LossParams,
}

impl InterferometerParams {
    pub fn new(
        rp1: RamanGain,
        rp2: RamanGain,
        input: CoherentInput,
        phi: f64,
        loss: LossParams,
    ) -> Result<Self> {
        require_finite("phi", phi)?;
        Ok(Self { rp1, rp2, input, phi, loss })
    }

    /// Balanced configuration: equal gains and `theta2 = theta1 + pi`.
    pub fn balanced(
        g: f64,
        theta1: f64,
        input: CoherentInput,
        phi: f64,
        loss: LossParams,
    ) -> Result<Self> {
        let rp1 = RamanGain::new(g, theta1)?;
        let rp2 = RamanGain::new(g, theta1 + PI)?;
        Self::new(rp1, rp2, input, phi, loss)
    }

    pub fn balanced_gain(&self) -> bool {
        self.rp1.g == self.rp2.g
    }

    /// True iff `g1 == g2` and `theta2 - theta1 = pi (mod 2pi)`.
    pub fn is_balanced(&self) -> bool {
        let d = reduce_angle(self.rp2.theta - self.rp1.theta);
        self.balanced_gain() && (d - PI).abs() < BALANCE_TOL
    }

    pub fn require_balanced(&self) -> Result<()> {
        if self.is_balanced() {
            Ok(())
        } else {
            Err(Error::NotBalanced)
        }
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_loss(mut self, loss: LossParams) -> Self {
        self.loss = loss;
        self
    }

    pub fn with_input(mut self, input: CoherentInput) -> Self {
        self.input = input;
        self
    }
}

/// The four interferometric coefficients of the output modes.
///
/// `a2 = direct_a a0 + cross_a b0^dag + ...` and
/// `b2 = e^{-i phi} (direct_b b0 + cross_b a0^dag) + ...`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub direct_a: Complex64,
    pub cross_a: Complex64,
    pub direct_b: Complex64,
    pub cross_b: Complex64,
}

/// Exact linear expansion of the output operators over the inputs
/// `{a0, b0, V, F}` and their conjugates.
///
/// ```text
/// a2 = U1 a0 + V1 b0^dag + sqrt(R) u2 V     + v2 F^dag
/// b2 = e^{-i phi} (U2 b0 + V2 a0^dag) + sqrt(R) v2 V^dag + u2 F
/// ```
///
/// `F` is not a canonical mode: `<F F^dag> = 1 - e^{-2 gamma_tau}`, `<F^dag F> = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeExpansion {
    /// `U1, V1, U2, V2`.
    pub coeffs: Coefficients,
    /// `d/dphi` of `coeffs`.
    pub coeffs_dphi: Coefficients,
    /// `u2`, `v2` of the second Raman process.
    pub rp2_u: Complex64,
    pub rp2_v: Complex64,
    /// `sqrt(R) u2`: multiplier of `V` in `a2`.
    pub env_a_vac: Complex64,
    /// `v2`: multiplier of `F^dag` in `a2`.
    pub env_a_lang: Complex64,
    /// `sqrt(R) v2`: multiplier of `V^dag` in `b2`.
    pub env_b_vac: Complex64,
    /// `u2`: multiplier of `F` in `b2`.
    pub env_b_lang: Complex64,
    /// Global `e^{-i phi}` in front of the `b0`, `a0^dag` part of `b2`.
    pub phase_b: Complex64,
    pub reflectance: f64,
    /// `1 - e^{-2 gamma_tau}`.
    pub lang_comm: f64,
}

impl ModeExpansion {
    /// `[a2, a2^dag]`, identically one for a physical expansion.
    pub fn commutator_a(&self) -> f64 {
        let c = &self.coeffs;
        c.direct_a.norm_sqr() - c.cross_a.norm_sqr() + self.reflectance * self.rp2_u.norm_sqr()
            - self.lang_comm * self.rp2_v.norm_sqr()
    }

    /// `[b2, b2^dag]`, identically one for a physical expansion.
    pub fn commutator_b(&self) -> f64 {
        let c = &self.coeffs;
        c.direct_b.norm_sqr() - c.cross_b.norm_sqr() - self.reflectance * self.rp2_v.norm_sqr()
            + self.lang_comm * self.rp2_u.norm_sqr()
    }

    /// `[a2, b2]`, identically zero for a physical expansion.
    pub fn cross_commutator(&self) -> Complex64 {
        let c = &self.coeffs;
        self.phase_b * (c.direct_a * c.cross_b - c.cross_a * c.direct_b)
            + self.rp2_u * self.rp2_v * (self.reflectance - self.lang_comm)
    }
}

/// Compose RP1, the phase/loss/damping stage and RP2 into the output expansion.
pub fn compose_expansion(params: &InterferometerParams) -> ModeExpansion {
    let (u1, v1) = params.rp1.coeffs();
    let (u2, v2) = params.rp2.coeffs();
    let sqrt_t = params.loss.transmissivity().sqrt();
    let damp = params.loss.damping();
    let reflectance = params.loss.reflectance();
    let rot = Complex64::from_polar(1.0, params.phi);
    let i = Complex64::i();

    // phi-dependent parts, each carrying e^{i phi}
    let a_dir = sqrt_t * u1 * u2 * rot;
    let a_cross = sqrt_t * v1 * u2 * rot;
    let b_dir = damp * u1 * u2 * rot;
    let b_cross = damp * v1 * u2 * rot;

    let coeffs = Coefficients {
        direct_a: a_dir + damp * v1.conj() * v2,
        cross_a: a_cross + damp * u1.conj() * v2,
        direct_b: b_dir + sqrt_t * v1.conj() * v2,
        cross_b: b_cross + sqrt_t * u1.conj() * v2,
    };
    let coeffs_dphi = Coefficients {
        direct_a: i * a_dir,
        cross_a: i * a_cross,
        direct_b: i * b_dir,
        cross_b: i * b_cross,
    };
    let sqrt_r = reflectance.sqrt();

    ModeExpansion {
        coeffs,
        coeffs_dphi,
        rp2_u: u2,
        rp2_v: v2,
        env_a_vac: sqrt_r * u2,
        env_a_lang: v2,
        env_b_vac: sqrt_r * v2,
        env_b_lang: u2,
        phase_b: rot.conj(),
        reflectance,
        lang_comm: params.loss.langevin_strength(),
    }
}

/// `(|U1|^2, |V1|^2)` for the balanced interferometer in closed form.
///
/// The cross coefficient carries the prefactor 1/4: it is what the expansion gives
/// and the only choice that reduces to `1/2 sinh^2(2g) (1 - cos phi)` without loss.
pub fn lossy_balanced_magnitudes(g: f64, loss: LossParams, phi: f64) -> (f64, f64) {
    let sqrt_t = loss.transmissivity().sqrt();
    let damp = loss.damping();
    let c2 = g.cosh().powi(2);
    let s2 = g.sinh().powi(2);
    let cos_phi = phi.cos();
    let abs_u_sq =
        (sqrt_t * c2 + damp * s2).powi(2) - 2.0 * sqrt_t * damp * s2 * c2 * (1.0 + cos_phi);
    let abs_v_sq = 0.25
        * (2.0 * g).sinh().powi(2)
        * (loss.transmissivity() + damp * damp - 2.0 * sqrt_t * damp * cos_phi);
    (abs_u_sq, abs_v_sq)
}
