//! Parameter sweeps rendered as CSV tables, the figure recipes and the oracle
//! verification grid.

mod config;
mod figures;
mod verify;

pub use config::{parse_config, ParamSet};
pub use figures::{figure, plot_script, FigureId};
pub use verify::{verify, Check, CheckStatus, VerifyOptions, VerifyReport};

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::correlations::{j_n2, j_x2};
use crate::error::{invalid, Result};
use crate::metrology::{hd_report, id_report, phase_sensing_number};
use crate::model::{CoherentInput, InterferometerParams, LossParams};
use crate::moments::{observable_stats, Observable};

/// `%.9g`-style rendering: 9 significant digits, trailing zeros dropped, `inf`/`-inf`/`nan`
/// for non-finite values.
pub fn format_g9(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    // the exponent has to come from the rounded mantissa, 9.999999999e5 rounds up to 1e6
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..DIGITS).contains(&exp) {
        let fixed = format!("{:.*}", (DIGITS - 1 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Phi,
    T,
    GammaTau,
    /// Phase-sensing probe number, reached by solving for `|alpha|` at fixed gain.
    NPh,
    AlphaMag,
}

impl Axis {
    pub const ALL: [Axis; 5] = [Axis::Phi, Axis::T, Axis::GammaTau, Axis::NPh, Axis::AlphaMag];

    pub fn name(&self) -> &'static str {
        match self {
            Axis::Phi => "phi",
            Axis::T => "T",
            Axis::GammaTau => "gamma_tau",
            Axis::NPh => "n_ph",
            Axis::AlphaMag => "alpha_mag",
        }
    }

    /// `fixed` with this parameter set to `value`.
    pub fn apply(&self, fixed: &InterferometerParams, value: f64) -> Result<InterferometerParams> {
        let input = fixed.input;
        let loss = fixed.loss;
        Ok(match self {
            Axis::Phi => InterferometerParams::new(fixed.rp1, fixed.rp2, input, value, loss)?,
            Axis::T => fixed.with_loss(LossParams::new(value, loss.gamma_tau())?),
            Axis::GammaTau => fixed.with_loss(LossParams::new(loss.transmissivity(), value)?),
            Axis::AlphaMag => fixed.with_input(CoherentInput::new(value, input.theta_alpha())?),
            Axis::NPh => {
                let g = fixed.rp1.g();
                let n_alpha = (value - g.sinh().powi(2)) / g.cosh().powi(2);
                if n_alpha.is_nan() || n_alpha < 0.0 {
                    return Err(invalid("n_ph", format!("{value} is below the vacuum contribution at g = {g}")));
                }
                fixed.with_input(CoherentInput::new(n_alpha.sqrt(), input.theta_alpha())?)
            }
        })
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Axis::ALL.iter().copied().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<_> = Axis::ALL.iter().map(|a| a.name()).collect();
            format!("unknown axis `{s}` (expected one of {})", names.join(", "))
        })
    }
}

/// A quantity that can be tabulated per grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    DeltaPhiHd,
    SnrHd,
    DeltaPhiId,
    SnrId,
    JX2,
    JN2,
    Sql,
    NPh,
    AlphaMag,
    Mean(Observable),
    Var(Observable),
    Std(Observable),
    Slope(Observable),
    AbsSlope(Observable),
}

const SIMPLE_METRICS: [(&str, Metric); 9] = [
    ("delta_phi_hd", Metric::DeltaPhiHd),
    ("snr_hd", Metric::SnrHd),
    ("delta_phi_id", Metric::DeltaPhiId),
    ("snr_id", Metric::SnrId),
    ("j_x2", Metric::JX2),
    ("j_n2", Metric::JN2),
    ("sql", Metric::Sql),
    ("n_ph", Metric::NPh),
    ("alpha_mag", Metric::AlphaMag),
];

// longest prefix first so `abs_slope_` is not read as an unknown `abs` metric
const STAT_PREFIXES: [&str; 5] = ["abs_slope_", "slope_", "mean_", "var_", "std_"];

impl Metric {
    pub fn name(&self) -> String {
        if let Some((n, _)) = SIMPLE_METRICS.iter().find(|(_, m)| m == self) {
            return (*n).to_string();
        }
        match self {
            Metric::Mean(o) => format!("mean_{o}"),
            Metric::Var(o) => format!("var_{o}"),
            Metric::Std(o) => format!("std_{o}"),
            Metric::Slope(o) => format!("slope_{o}"),
            Metric::AbsSlope(o) => format!("abs_slope_{o}"),
            _ => unreachable!("simple metrics are named in the table"),
        }
    }

    /// Value at one parameter point. Failures of the underlying model (a degenerate
    /// noise floor, an unbalanced configuration) come back as `Err`.
    pub fn evaluate(&self, params: &InterferometerParams) -> Result<f64> {
        let stat = |o: Observable| observable_stats(params, o);
        Ok(match *self {
            Metric::DeltaPhiHd => hd_report(params)?.delta_phi,
            Metric::SnrHd => hd_report(params)?.snr,
            Metric::DeltaPhiId => id_report(params)?.delta_phi,
            Metric::SnrId => id_report(params)?.snr,
            Metric::JX2 => j_x2(params)?.j_value,
            Metric::JN2 => j_n2(params)?.j_value,
            Metric::Sql => 1.0 / phase_sensing_number(params).sqrt(),
            Metric::NPh => phase_sensing_number(params),
            Metric::AlphaMag => params.input.alpha_mag(),
            Metric::Mean(o) => stat(o)?.mean,
            Metric::Var(o) => stat(o)?.variance,
            Metric::Std(o) => stat(o)?.variance.sqrt(),
            Metric::Slope(o) => stat(o)?.slope,
            Metric::AbsSlope(o) => stat(o)?.slope.abs(),
        })
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if let Some((_, m)) = SIMPLE_METRICS.iter().find(|(n, _)| *n == s) {
            return Ok(*m);
        }
        for prefix in STAT_PREFIXES {
            if let Some(rest) = s.strip_prefix(prefix) {
                let o: Observable = rest.parse().map_err(|_| format!("unknown metric `{s}`"))?;
                return Ok(match prefix {
                    "abs_slope_" => Metric::AbsSlope(o),
                    "slope_" => Metric::Slope(o),
                    "mean_" => Metric::Mean(o),
                    "var_" => Metric::Var(o),
                    _ => Metric::Std(o),
                });
            }
        }
        Err(format!("unknown metric `{s}`"))
    }
}

/// Parse a comma-separated metric list.
pub fn parse_metrics(list: &str) -> std::result::Result<Vec<Metric>, String> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub lo: f64,
    pub hi: f64,
    /// A single point evaluates at `lo` only.
    pub points: usize,
    /// Values of every parameter that is not swept.
    pub fixed: InterferometerParams,
    pub outputs: Vec<Metric>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(invalid("points", "need at least one grid point"));
        }
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(invalid("range", "bounds must be finite"));
        }
        if self.points > 1 && self.lo >= self.hi {
            return Err(invalid("range", format!("need lo < hi, got [{}, {}]", self.lo, self.hi)));
        }
        Ok(())
    }

    /// Grid value `i`; the last point is exactly `hi`.
    pub fn value(&self, i: usize) -> f64 {
        if self.points == 1 {
            self.lo
        } else if i + 1 == self.points {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.points - 1) as f64
        }
    }
}

/// Rows of numbers under a header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&x| format_g9(x)))?;
        }
        w.flush()
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

/// One row per grid point: the axis value followed by the requested metrics. Points
/// where a metric is undefined hold `nan`.
pub fn run_sweep(spec: &SweepSpec) -> Result<Table> {
    spec.validate()?;
    let rows = (0..spec.points)
        .into_par_iter()
        .map(|i| {
            let x = spec.value(i);
            let mut row = Vec::with_capacity(spec.outputs.len() + 1);
            row.push(x);
            match spec.axis.apply(&spec.fixed, x) {
                Ok(p) => row.extend(spec.outputs.iter().map(|m| m.evaluate(&p).unwrap_or(f64::NAN))),
                Err(_) => row.extend(std::iter::repeat_n(f64::NAN, spec.outputs.len())),
            }
            row
        })
        .collect();
    let mut header = vec![spec.axis.name().to_string()];
    header.extend(spec.outputs.iter().map(Metric::name));
    Ok(Table { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn g9_formatting() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (3.5326e-3, "0.0035326"),
            (1.0 / 3.0, "0.333333333"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (9.9999999999e-5, "0.0001"),
            (1.5e-5, "1.5e-05"),
            (999999999.6, "1e+09"),
            (f64::INFINITY, "inf"),
            (f64::NEG_INFINITY, "-inf"),
            (f64::NAN, "nan"),
            (1e300, "1e+300"),
        ];
        for (x, s) in cases {
            assert_eq!(format_g9(x), s, "{x:e}");
        }
    }

    #[test]
    fn metric_names_round_trip() {
        for name in ["delta_phi_hd", "snr_id", "j_n2", "mean_n_a2", "abs_slope_n_a2", "std_x_b2", "slope_y_a2"] {
            assert_eq!(name.parse::<Metric>().unwrap().name(), name);
        }
        assert!("mean_z".parse::<Metric>().is_err());
        assert!("abs".parse::<Metric>().is_err());
        assert!(parse_metrics("sql, n_ph").unwrap() == vec![Metric::Sql, Metric::NPh]);
    }

    fn fig2a_fixed() -> InterferometerParams {
        InterferometerParams::balanced(2.0, 0.0, CoherentInput::new(10.0, FRAC_PI_2).unwrap(), 0.0, LossParams::lossless())
            .unwrap()
    }

    #[test]
    fn single_point_matches_direct_call() {
        let spec = SweepSpec {
            axis: Axis::Phi,
            lo: 0.0,
            hi: 0.0,
            points: 1,
            fixed: fig2a_fixed(),
            outputs: vec![Metric::DeltaPhiHd, Metric::SnrHd],
        };
        let t = run_sweep(&spec).unwrap();
        assert_eq!(t.rows.len(), 1);
        let r = hd_report(&fig2a_fixed()).unwrap();
        assert_eq!(t.rows[0], vec![0.0, r.delta_phi, r.snr]);
    }

    #[test]
    fn grid_hits_both_ends() {
        let spec = SweepSpec { axis: Axis::T, lo: 0.01, hi: 1.0, points: 100, fixed: fig2a_fixed(), outputs: vec![] };
        assert_eq!(spec.value(0), 0.01);
        assert_eq!(spec.value(99), 1.0);
        assert!((spec.value(1) - 0.02).abs() < 1e-15);
    }

    #[test]
    fn n_ph_axis_inverts_probe_number() {
        let p = Axis::NPh.apply(&fig2a_fixed(), 1_428.565_758_218_8).unwrap();
        assert!((p.input.alpha_mag() - 10.0).abs() < 1e-9);
        assert!(Axis::NPh.apply(&fig2a_fixed(), 1.0).is_err());
    }

    #[test]
    fn bad_ranges_rejected() {
        let mut spec = SweepSpec { axis: Axis::Phi, lo: 1.0, hi: -1.0, points: 5, fixed: fig2a_fixed(), outputs: vec![] };
        assert!(run_sweep(&spec).is_err());
        spec.points = 0;
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn csv_is_lf_terminated_with_header() {
        let t = Table { header: vec!["phi".into(), "x".into()], rows: vec![vec![0.5, f64::INFINITY]] };
        assert_eq!(t.to_csv(), "phi,x\n0.5,inf\n");
        let empty = Table { header: vec!["phi".into()], rows: vec![] };
        assert_eq!(empty.to_csv(), "phi\n");
    }
}
