use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::{Axis, Metric, Table};
use crate::error::{invalid, Result};
use crate::model::{CoherentInput, InterferometerParams, LossParams};
use crate::moments::Observable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    F2a,
    F2b,
    F3a,
    F3b,
    F4,
    F5a,
    F5b,
    F6a,
    F6b,
    F7a,
    F7b,
}

impl FigureId {
    pub const ALL: [FigureId; 11] = [
        FigureId::F2a,
        FigureId::F2b,
        FigureId::F3a,
        FigureId::F3b,
        FigureId::F4,
        FigureId::F5a,
        FigureId::F5b,
        FigureId::F6a,
        FigureId::F6b,
        FigureId::F7a,
        FigureId::F7b,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FigureId::F2a => "2a",
            FigureId::F2b => "2b",
            FigureId::F3a => "3a",
            FigureId::F3b => "3b",
            FigureId::F4 => "4",
            FigureId::F5a => "5a",
            FigureId::F5b => "5b",
            FigureId::F6a => "6a",
            FigureId::F6b => "6b",
            FigureId::F7a => "7a",
            FigureId::F7b => "7b",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        FigureId::ALL.iter().copied().find(|f| f.name() == s).ok_or_else(|| {
            let names: Vec<_> = FigureId::ALL.iter().map(|f| f.name()).collect();
            format!("unknown figure `{s}` (expected one of {})", names.join(", "))
        })
    }
}

struct Column {
    name: &'static str,
    fixed: InterferometerParams,
    metric: Metric,
}

struct Recipe {
    axis: Axis,
    lo: f64,
    hi: f64,
    points: usize,
    columns: Vec<Column>,
}

const G: f64 = 2.0;
const ALPHA: f64 = 10.0;
const PHI_ID: f64 = 0.062;

fn setup(theta_alpha: f64, phi: f64, t: f64, gamma_tau: f64) -> InterferometerParams {
    let input = CoherentInput::new(ALPHA, theta_alpha).expect("fixed input");
    let loss = LossParams::new(t, gamma_tau).expect("fixed loss");
    InterferometerParams::balanced(G, 0.0, input, phi, loss).expect("fixed configuration")
}

fn col(name: &'static str, fixed: InterferometerParams, metric: Metric) -> Column {
    Column { name, fixed, metric }
}

fn same(fixed: InterferometerParams, metrics: &[Metric]) -> Vec<Column> {
    metrics.iter().map(|&m| Column { name: "", fixed, metric: m }).collect()
}

fn recipe(id: FigureId) -> Recipe {
    use Metric::*;
    let n = Observable::NumA2;
    let phi_axis = |columns| Recipe { axis: Axis::Phi, lo: -1.0, hi: 1.0, points: 401, columns };
    let full_turn = |columns| Recipe { axis: Axis::Phi, lo: 0.0, hi: 2.0 * PI, points: 361, columns };
    let t_axis = |columns| Recipe { axis: Axis::T, lo: 0.01, hi: 1.0, points: 100, columns };
    let gt_axis = |columns| Recipe { axis: Axis::GammaTau, lo: 0.0, hi: 1.5, points: 151, columns };
    match id {
        FigureId::F2a => phi_axis(same(setup(FRAC_PI_2, 0.0, 1.0, 0.0), &[DeltaPhiHd, SnrHd])),
        FigureId::F2b => phi_axis(same(setup(0.0, 0.0, 1.0, 0.0), &[DeltaPhiHd, SnrHd])),
        FigureId::F3a => phi_axis(same(setup(0.0, 0.0, 1.0, 0.0), &[Std(n), AbsSlope(n), DeltaPhiId])),
        FigureId::F3b => phi_axis(same(setup(0.0, 0.0, 1.0, 0.0), &[Mean(n), Var(n), SnrId])),
        FigureId::F4 => {
            let hd = setup(FRAC_PI_2, 0.0, 1.0, 0.0);
            let hd_lossy = setup(FRAC_PI_2, 0.0, 0.8, 0.1);
            let id = setup(0.0, PHI_ID, 1.0, 0.0);
            let id_lossy = setup(0.0, PHI_ID, 0.8, 0.1);
            Recipe {
                axis: Axis::NPh,
                lo: 100.0,
                hi: 10_000.0,
                points: 199,
                columns: vec![
                    col("alpha_mag", hd, AlphaMag),
                    col("sql", hd, Sql),
                    col("delta_phi_hd", hd, DeltaPhiHd),
                    col("delta_phi_hd_lossy", hd_lossy, DeltaPhiHd),
                    col("delta_phi_id", id, DeltaPhiId),
                    col("delta_phi_id_lossy", id_lossy, DeltaPhiId),
                ],
            }
        }
        FigureId::F5a => full_turn(same(setup(0.0, 0.0, 1.0, 0.0), &[JX2])),
        FigureId::F5b => full_turn(same(setup(0.0, 0.0, 1.0, 0.0), &[JN2])),
        FigureId::F6a => t_axis(same(setup(FRAC_PI_2, 0.0, 1.0, 0.0), &[JX2])),
        FigureId::F6b => gt_axis(same(setup(FRAC_PI_2, 0.0, 1.0, 0.0), &[JX2])),
        FigureId::F7a => t_axis(same(setup(0.0, PHI_ID, 1.0, 0.0), &[JN2])),
        FigureId::F7b => gt_axis(same(setup(0.0, PHI_ID, 1.0, 0.0), &[JN2])),
    }
}

/// Data behind one figure panel, at the recipe's own resolution unless `points` is given.
pub fn figure(id: FigureId, points: Option<usize>) -> Result<Table> {
    let mut r = recipe(id);
    if let Some(p) = points {
        if p < 2 {
            return Err(invalid("points", "a figure needs at least two points"));
        }
        r.points = p;
    }
    let step = (r.hi - r.lo) / (r.points - 1) as f64;
    let rows = (0..r.points)
        .into_par_iter()
        .map(|i| {
            let x = if i + 1 == r.points { r.hi } else { r.lo + step * i as f64 };
            let mut row = vec![x];
            row.extend(r.columns.iter().map(|c| {
                r.axis.apply(&c.fixed, x).and_then(|p| c.metric.evaluate(&p)).unwrap_or(f64::NAN)
            }));
            row
        })
        .collect();
    let mut header = vec![r.axis.name().to_string()];
    header.extend(r.columns.iter().map(|c| if c.name.is_empty() { c.metric.name() } else { c.name.to_string() }));
    Ok(Table { header, rows })
}

/// Gnuplot script that draws every data column of `csv_path` against the first.
pub fn plot_script(id: FigureId, csv_path: &str, header: &[String]) -> String {
    let mut s = format!(
        "# figure {id}: columns {}\nset datafile separator ','\nset key autotitle columnhead\nset xlabel '{}'\n",
        header.join(", "),
        header.first().map(String::as_str).unwrap_or("x"),
    );
    let curves: Vec<String> =
        (2..=header.len()).map(|i| format!("'{csv_path}' using 1:{i} with lines")).collect();
    s.push_str(&format!("plot {}\n", curves.join(", \\\n     ")));
    s
}
