use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::io::{self, Write};

use rayon::prelude::*;

use super::format_g9;
use crate::correlations::lcc;
use crate::error::{invalid, Error, Result};
use crate::fock::{oracle_report_auto, CovPair, OracleReport, AUTO_DEFICIT_TARGET, MAX_AUTO_CUTOFF};
use crate::metrology::sensitivity;
use crate::model::{CoherentInput, InterferometerParams, LossParams};
use crate::moments::{cov_number, cov_quad, observable_stats, Observable, ObservableStats};

/// Input phase used on the grid, generic so that both quadratures of the seed are lit.
const GRID_THETA_ALPHA: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Relative tolerance.
    pub tol: f64,
    /// Absolute floor under the relative tolerance.
    pub abs_floor: f64,
    pub max_g: f64,
    pub max_alpha: f64,
    /// Starting truncation; raised automatically until the trace deficit is negligible.
    pub cutoff: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { tol: 1e-6, abs_floor: 1e-8, max_g: 0.6, max_alpha: 1.2, cutoff: 16 }
    }
}

impl VerifyOptions {
    /// Relative tolerance `tol` over an absolute floor two decades below it.
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, abs_floor: tol * 1e-2, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.abs_floor >= 0.0) {
            return Err(invalid("tol", "tolerances must be positive"));
        }
        if !(self.max_g > 0.0 && self.max_g <= 0.8) {
            return Err(invalid("max_g", format!("must lie in (0, 0.8], got {}", self.max_g)));
        }
        if !(self.max_alpha >= 0.0 && self.max_alpha <= 1.5) {
            return Err(invalid("max_alpha", format!("must lie in [0, 1.5], got {}", self.max_alpha)));
        }
        Ok(())
    }

    /// `(g, |alpha|, T, gamma_tau, phi)` points; with the default maxima this is the
    /// 3 x 3 x 3 x 3 x 4 acceptance grid.
    pub fn grid(&self) -> Vec<[f64; 5]> {
        let gs = [self.max_g / 3.0, 2.0 * self.max_g / 3.0, self.max_g];
        let alphas = [0.0, self.max_alpha * 0.7 / 1.2, self.max_alpha];
        let mut out = Vec::new();
        for g in gs {
            for a in alphas {
                for t in [1.0, 0.8, 0.5] {
                    for gt in [0.0, 0.1, 0.3] {
                        for phi in [0.0, 0.3, FRAC_PI_2, PI] {
                            out.push([g, a, t, gt, phi]);
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckStatus {
    Pass,
    Mismatch,
    /// The oracle could not reach a negligible trace deficit.
    TruncationOverflow,
    /// Either side raised a model error.
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    /// `(g, |alpha|, T, gamma_tau, phi)`.
    pub point: [f64; 5],
    pub quantity: String,
    pub closed_form: f64,
    pub oracle: f64,
    pub cutoff: usize,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub options: VerifyOptions,
    pub checks: Vec<Check>,
}

fn params_at(point: [f64; 5]) -> Result<InterferometerParams> {
    let [g, a, t, gt, phi] = point;
    InterferometerParams::balanced(g, 0.0, CoherentInput::new(a, GRID_THETA_ALPHA)?, phi, LossParams::new(t, gt)?)
}

/// Equal as infinities, or within `max(tol |closed|, floor)`.
fn agrees(closed: f64, oracle: f64, tol: f64, floor: f64) -> bool {
    if closed.is_infinite() || oracle.is_infinite() {
        return closed == oracle;
    }
    (closed - oracle).abs() <= (tol * closed.abs()).max(floor)
}

struct Measured {
    stats: [ObservableStats; 6],
    cov_x: f64,
    cov_n: f64,
}

impl Measured {
    fn stat(&self, o: Observable) -> ObservableStats {
        self.stats[Observable::ALL.iter().position(|&x| x == o).unwrap_or(0)]
    }
}

fn closed_measured(p: &InterferometerParams) -> Result<Measured> {
    let mut stats = [ObservableStats { mean: 0.0, variance: 0.0, slope: 0.0 }; 6];
    for (slot, o) in stats.iter_mut().zip(Observable::ALL) {
        *slot = observable_stats(p, o)?;
    }
    Ok(Measured { stats, cov_x: cov_quad(p), cov_n: cov_number(p) })
}

fn oracle_measured(r: &OracleReport) -> Measured {
    Measured { stats: r.stats, cov_x: r.cov(CovPair::Quadrature), cov_n: r.cov(CovPair::Number) }
}

/// `(name, closed form, oracle)` triples. Sensitivities are only compared where the
/// closed-form slope clears the absolute floor and correlations only where both
/// marginal variances do; elsewhere they are 0/0 and the slope and variance rows carry
/// the comparison.
fn pairs(c: &Measured, o: &Measured, floor: f64) -> Result<Vec<(String, f64, f64)>> {
    let mut out = Vec::new();
    for which in Observable::ALL {
        let (sc, so) = (c.stat(which), o.stat(which));
        out.push((format!("mean_{which}"), sc.mean, so.mean));
        out.push((format!("var_{which}"), sc.variance, so.variance));
        if matches!(which, Observable::QuadXA2 | Observable::NumA2) {
            out.push((format!("slope_{which}"), sc.slope, so.slope));
            if sc.slope.abs() > floor {
                out.push((format!("delta_phi_{which}"), sensitivity(&sc), sensitivity(&so)));
            }
        }
    }
    out.push(("cov_x".into(), c.cov_x, o.cov_x));
    out.push(("cov_n".into(), c.cov_n, o.cov_n));
    let lccs = [
        ("j_x2", Observable::QuadXA2, Observable::QuadXB2, c.cov_x, o.cov_x),
        ("j_n2", Observable::NumA2, Observable::NumB2, c.cov_n, o.cov_n),
    ];
    for (name, a, b, cov_c, cov_o) in lccs {
        let (va, vb) = (c.stat(a).variance, c.stat(b).variance);
        if va > floor && vb > floor {
            let jo = lcc(cov_o, o.stat(a).variance, o.stat(b).variance)?;
            out.push((name.to_string(), lcc(cov_c, va, vb)?, jo));
        }
    }
    Ok(out)
}

fn check_point(point: [f64; 5], opts: &VerifyOptions) -> Vec<Check> {
    let failed = |quantity: &str, status: CheckStatus, cutoff: usize| Check {
        point,
        quantity: quantity.into(),
        closed_form: f64::NAN,
        oracle: f64::NAN,
        cutoff,
        status,
    };
    let params = match params_at(point) {
        Ok(p) => p,
        Err(e) => return vec![failed("params", CheckStatus::Failed(e.to_string()), 0)],
    };
    let closed = match closed_measured(&params) {
        Ok(m) => m,
        Err(e) => return vec![failed("closed_form", CheckStatus::Failed(e.to_string()), 0)],
    };
    let report = match oracle_report_auto(&params, opts.cutoff, AUTO_DEFICIT_TARGET, MAX_AUTO_CUTOFF) {
        Ok(r) => r,
        Err(Error::TruncationOverflow { cutoff, .. }) => {
            return vec![failed("oracle", CheckStatus::TruncationOverflow, cutoff)]
        }
        Err(e) => return vec![failed("oracle", CheckStatus::Failed(e.to_string()), 0)],
    };
    let pairs = match pairs(&closed, &oracle_measured(&report), opts.abs_floor) {
        Ok(p) => p,
        Err(e) => return vec![failed("lcc", CheckStatus::Failed(e.to_string()), report.cutoff)],
    };
    pairs
        .into_iter()
        .map(|(quantity, c, o)| Check {
            point,
            quantity,
            closed_form: c,
            oracle: o,
            cutoff: report.cutoff,
            status: if agrees(c, o, opts.tol, opts.abs_floor) { CheckStatus::Pass } else { CheckStatus::Mismatch },
        })
        .collect()
}

/// Compare every closed-form quantity with the oracle over the grid of `opts`.
pub fn verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    opts.validate()?;
    let checks = opts.grid().into_par_iter().flat_map_iter(|p| check_point(p, opts)).collect();
    Ok(VerifyReport { options: *opts, checks })
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == CheckStatus::Pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status != CheckStatus::Pass)
    }

    /// Largest `|oracle - closed| / |closed|` over finite checks whose closed-form value
    /// clears the absolute floor.
    pub fn worst_relative(&self) -> f64 {
        let floor = self.options.abs_floor;
        self.checks
            .iter()
            .filter(|c| c.closed_form.is_finite() && c.oracle.is_finite() && c.closed_form.abs() > floor)
            .map(|c| ((c.oracle - c.closed_form) / c.closed_form).abs())
            .fold(0.0, f64::max)
    }

    pub fn summary(&self) -> String {
        let count = |f: fn(&CheckStatus) -> bool| self.checks.iter().filter(|c| f(&c.status)).count();
        let mut s = String::new();
        let o = &self.options;
        let _ = writeln!(
            s,
            "oracle verification: tol {:e} (floor {:e}), max_g {}, max_alpha {}",
            o.tol, o.abs_floor, o.max_g, o.max_alpha
        );
        let _ = writeln!(
            s,
            "{} checks: {} pass, {} mismatch, {} truncation overflow, {} error",
            self.checks.len(),
            count(|s| *s == CheckStatus::Pass),
            count(|s| *s == CheckStatus::Mismatch),
            count(|s| *s == CheckStatus::TruncationOverflow),
            count(|s| matches!(s, CheckStatus::Failed(_))),
        );
        let _ = writeln!(s, "largest relative deviation: {:.3e}", self.worst_relative());
        for c in self.failures().take(20) {
            let [g, a, t, gt, phi] = c.point;
            let _ = writeln!(
                s,
                "  FAIL g={g:.4} alpha={a:.4} T={t} gamma_tau={gt} phi={phi:.4} {}: closed {} oracle {} ({:?})",
                c.quantity,
                format_g9(c.closed_form),
                format_g9(c.oracle),
                c.status
            );
        }
        let more = self.failures().count().saturating_sub(20);
        if more > 0 {
            let _ = writeln!(s, "  ... {more} more");
        }
        let _ = writeln!(s, "{}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record([
            "g", "alpha_mag", "T", "gamma_tau", "phi", "quantity", "closed_form", "oracle", "abs_diff", "cutoff", "status",
        ])?;
        for c in &self.checks {
            let diff = if c.closed_form == c.oracle { 0.0 } else { (c.oracle - c.closed_form).abs() };
            let status = match &c.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Mismatch => "mismatch",
                CheckStatus::TruncationOverflow => "truncation_overflow",
                CheckStatus::Failed(_) => "error",
            };
            let mut rec: Vec<String> = c.point.iter().map(|&x| format_g9(x)).collect();
            rec.push(c.quantity.clone());
            rec.extend([c.closed_form, c.oracle, diff].map(format_g9));
            rec.push(c.cutoff.to_string());
            rec.push(status.into());
            w.write_record(&rec)?;
        }
        w.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let g = VerifyOptions::default().grid();
        assert_eq!(g.len(), 324);
        assert!((g[0][0] - 0.2).abs() < 1e-15);
        assert!(g.iter().any(|p| (p[1] - 0.7).abs() < 1e-15));
    }

    #[test]
    fn agreement_rule() {
        assert!(agrees(1.0, 1.0 + 5e-7, 1e-6, 1e-8));
        assert!(!agrees(1.0, 1.0 + 5e-6, 1e-6, 1e-8));
        assert!(agrees(0.0, 5e-9, 1e-6, 1e-8));
        assert!(agrees(f64::INFINITY, f64::INFINITY, 1e-6, 1e-8));
        assert!(!agrees(f64::INFINITY, 1e9, 1e-6, 1e-8));
    }

    #[test]
    fn out_of_regime_rejected() {
        assert!(verify(&VerifyOptions { max_g: 0.9, ..Default::default() }).is_err());
        assert!(verify(&VerifyOptions { max_alpha: 2.0, ..Default::default() }).is_err());
    }

    #[test]
    fn small_grid_passes() {
        let r = verify(&VerifyOptions { max_g: 0.3, max_alpha: 0.6, ..Default::default() }).unwrap();
        assert!(r.passed(), "{}", r.summary());
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), r.checks.len() + 1);
    }
}
