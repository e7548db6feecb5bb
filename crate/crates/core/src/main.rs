use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use su11::correlations::{j_n2, j_rp1, j_x2};
use su11::metrology::{optimize_phase, report, DetectionScheme};
use su11::sweep::{
    figure, format_g9, parse_config, parse_metrics, plot_script, run_sweep, verify, Axis, FigureId, ParamSet,
    SweepSpec, VerifyOptions,
};

#[derive(Parser)]
#[command(name = "su11", version, about = "Phase sensitivity and atom-light correlations of a lossy SU(1,1) interferometer")]
struct Cli {
    /// key=value parameter file; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file (default stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(flatten)]
    params: ParamFlags,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct ParamFlags {
    /// Gain of both Raman processes
    #[arg(long, global = true, allow_negative_numbers = true)]
    g: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    theta1: Option<f64>,
    /// Defaults to theta1 + pi
    #[arg(long, global = true, allow_negative_numbers = true)]
    theta2: Option<f64>,
    #[arg(long = "alpha_mag", alias = "alpha-mag", global = true)]
    alpha_mag: Option<f64>,
    #[arg(long = "theta_alpha", alias = "theta-alpha", global = true, allow_negative_numbers = true)]
    theta_alpha: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    phi: Option<f64>,
    /// Optical transmissivity
    #[arg(long = "T", global = true)]
    t: Option<f64>,
    #[arg(long = "gamma_tau", alias = "gamma-tau", global = true)]
    gamma_tau: Option<f64>,
    /// Starting oracle truncation
    #[arg(long, global = true)]
    cutoff: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Phase sensitivity against the standard quantum limit
    Sens {
        #[arg(long, value_enum, default_value_t = Scheme::Both)]
        scheme: Scheme,
        /// Search [lo, hi] for the best working point instead of using --phi
        #[arg(long)]
        optimize: bool,
        #[arg(long, default_value_t = 1e-4, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        hi: f64,
    },
    /// Signal-to-noise ratio of the detected observable
    Snr {
        #[arg(long, value_enum, default_value_t = Scheme::Both)]
        scheme: Scheme,
    },
    /// Linear correlation coefficients after the first process and at the output
    Lcc,
    /// Tabulate metrics over one parameter
    Sweep {
        #[arg(long)]
        axis: String,
        #[arg(long, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, allow_negative_numbers = true)]
        hi: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Comma-separated, e.g. delta_phi_hd,snr_hd,mean_n_a2
        #[arg(long)]
        metrics: String,
    },
    /// Data behind one figure panel
    Figure {
        id: String,
        #[arg(long)]
        points: Option<usize>,
        /// Also write a gnuplot script that plots the CSV
        #[arg(long)]
        plot_script: Option<PathBuf>,
    },
    /// Check the closed forms against the truncated Fock-space simulation
    Verify {
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long = "max_g", alias = "max-g", default_value_t = 0.6)]
        max_g: f64,
        #[arg(long = "max_alpha", alias = "max-alpha", default_value_t = 1.2)]
        max_alpha: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Hd,
    Id,
    Both,
}

impl Scheme {
    fn schemes(self) -> &'static [DetectionScheme] {
        match self {
            Scheme::Hd => &[DetectionScheme::Homodyne],
            Scheme::Id => &[DetectionScheme::Intensity],
            Scheme::Both => &[DetectionScheme::Homodyne, DetectionScheme::Intensity],
        }
    }
}

fn scheme_name(s: DetectionScheme) -> &'static str {
    match s {
        DetectionScheme::Homodyne => "hd",
        DetectionScheme::Intensity => "id",
    }
}

enum Failure {
    Usage(String),
    Verification,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn param_set(cli: &Cli) -> Result<ParamSet, Failure> {
    let mut set = ParamSet::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        set = parse_config(&text, set).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    let f = &cli.params;
    let overrides = [
        ("g", f.g),
        ("theta1", f.theta1),
        ("theta2", f.theta2),
        ("alpha_mag", f.alpha_mag),
        ("theta_alpha", f.theta_alpha),
        ("phi", f.phi),
        ("T", f.t),
        ("gamma_tau", f.gamma_tau),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            set.set(key, &v.to_string())?;
        }
    }
    if let Some(c) = f.cutoff {
        set.cutoff = c;
    }
    set.validate()?;
    Ok(set)
}

fn output(cli: &Cli) -> io::Result<Box<dyn Write>> {
    Ok(match &cli.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_rows(out: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let set = param_set(cli)?;
    let params = set.to_params()?;
    match &cli.command {
        Command::Sens { scheme, optimize, lo, hi } => {
            let mut rows = Vec::new();
            for &s in scheme.schemes() {
                let phi = if *optimize { optimize_phase(s, &params, (*lo, *hi))?.0 } else { params.phi };
                let r = report(&params.with_phi(phi), s)?;
                let mut row = vec![scheme_name(s).to_string()];
                row.extend([phi, r.delta_phi, r.snr, r.n_ph, r.sql].map(format_g9));
                row.push(r.beats_sql.to_string());
                rows.push(row);
            }
            write_rows(&mut output(cli)?, &["scheme", "phi", "delta_phi", "snr", "n_ph", "sql", "beats_sql"], &rows)?;
        }
        Command::Snr { scheme } => {
            let mut rows = Vec::new();
            for &s in scheme.schemes() {
                let r = report(&params, s)?;
                let mut row = vec![scheme_name(s).to_string()];
                row.extend([params.phi, r.stats.mean, r.stats.variance.sqrt(), r.snr].map(format_g9));
                rows.push(row);
            }
            write_rows(&mut output(cli)?, &["scheme", "phi", "mean", "std", "snr"], &rows)?;
        }
        Command::Lcc => {
            let (jx1, jy1, jn1) = j_rp1(set.g, set.theta1, set.alpha_mag);
            let jx2 = j_x2(&params).map(|r| r.j_value).unwrap_or(f64::NAN);
            let jn2 = j_n2(&params).map(|r| r.j_value).unwrap_or(f64::NAN);
            let row = [params.phi, jx1, jy1, jn1, jx2, jn2].map(format_g9).to_vec();
            write_rows(&mut output(cli)?, &["phi", "j_x1", "j_y1", "j_n1", "j_x2", "j_n2"], &[row])?;
        }
        Command::Sweep { axis, lo, hi, points, metrics } => {
            let spec = SweepSpec {
                axis: axis.parse::<Axis>()?,
                lo: *lo,
                hi: *hi,
                points: *points,
                fixed: params,
                outputs: parse_metrics(metrics)?,
            };
            run_sweep(&spec)?.write_csv(output(cli)?)?;
        }
        Command::Figure { id, points, plot_script: script } => {
            let id: FigureId = id.parse()?;
            let table = figure(id, *points)?;
            table.write_csv(output(cli)?)?;
            if let Some(path) = script {
                let csv = cli.out.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| format!("figure_{id}.csv"));
                std::fs::write(path, plot_script(id, &csv, &table.header))?;
            }
        }
        Command::Verify { tol, max_g, max_alpha } => {
            let opts = VerifyOptions { max_g: *max_g, max_alpha: *max_alpha, cutoff: set.cutoff, ..VerifyOptions::with_tol(*tol) };
            let report = verify(&opts)?;
            report.write_csv(output(cli)?)?;
            eprint!("{}", report.summary());
            if !report.passed() {
                return Err(Failure::Verification);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
