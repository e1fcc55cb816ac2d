// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod svg;

use std::f64::consts::PI;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use cqd_core::atom::ApparatusParams;
use cqd_core::dynamics::{integrate_spin, integrate_two_level, DynamicsConfig, Physics, SpinState};
use cqd_core::ensemble::{flip_probability, flip_probability_mc, AngularDistribution};
use cqd_core::field::{chamber_field, quadrupole_at};
use cqd_core::flip::{scan, FlipModel};
use cqd_core::hyperfine::{load_hartree_table, self_avg_coefficient, torque_avg_coefficient, RadialDensity};
use cqd_core::parallel::Execution;
use cqd_core::stats::{curve_report, fit_ki, load_dataset, Curve};
use cqd_core::verify::{entangle_mc, two_stage_mc, two_stage_probability, uncertainty_grid};
use cqd_core::CqdError;
use serde_json::{json, Value};

use config::{ConfigError, Resolved, CONFIG_ENV};
use output::{canonical_json, flatten_record, fmt_g, Cell, Table};

#[derive(Parser, Debug)]
#[command(
    name = "cqd",
    version,
    about = "Spin-flip and collapse models for sequential Stern-Gerlach measurements",
    after_help = "Exit status: 0 on success, 1 on usage or configuration errors, 2 on data or numeric errors.\n\
                  A provenance header describing the resolved configuration is written to stderr."
)]
struct Cli {
    /// Parameter file (TOML, or JSON if it starts with `{`).
    #[arg(long, global = true, env = CONFIG_ENV, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Random seed for Monte Carlo runs (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write results here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Dist {
    Iso,
    Heart,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum PhysicsArg {
    Bloch,
    Llg,
    Cqd,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FieldArg {
    /// Constant field along z.
    Static,
    /// Quadrupole field through the null point of the rotation chamber.
    Quadrupole,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Coupling {
    /// Remnant-field coupling only.
    K0,
    /// Transverse nuclear-field coupling only.
    K1,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Flip-fraction curves on a log-spaced current grid (CSV columns
    /// I,k_m,k0,k1,f_r1,W_m,W_rabi,W1,W2,W3,W4,W_cqd).
    Scan {
        #[arg(long, default_value_t = 0.01)]
        i_min: f64,
        #[arg(long, default_value_t = 0.5)]
        i_max: f64,
        #[arg(long, default_value_t = 400)]
        points: usize,
        /// Induction factor (overrides the config file).
        #[arg(long)]
        ki: Option<f64>,
        /// Also write a log-x plot of the curve family to this path.
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
        /// Overlay these measurements on the plot.
        #[arg(long, value_name = "CSV")]
        data: Option<PathBuf>,
    },
    /// Goodness of fit of one model curve against a dataset (JSON).
    Stats {
        #[arg(long, value_name = "CSV")]
        data: PathBuf,
        #[arg(long, value_parser = parse_curve)]
        model: Curve,
    },
    /// Fit the induction coefficient to a dataset (JSON).
    FitKi {
        #[arg(long, value_name = "CSV")]
        data: PathBuf,
    },
    /// Monte Carlo collapse fraction for one electron polar angle (JSON
    /// with estimate, stderr and the analytic value).
    McCollapse {
        #[arg(long, allow_hyphen_values = true)]
        theta_e: f64,
        #[arg(long, value_enum, default_value_t = Dist::Iso)]
        dist: Dist,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
    },
    /// Integrate one spin trajectory (CSV columns t,theta_e,phi_e,theta_n,phi_n).
    Simulate {
        #[arg(long, default_value_t = 1.0)]
        theta_e: f64,
        #[arg(long, default_value_t = 0.0)]
        phi_e: f64,
        #[arg(long, default_value_t = 2.0)]
        theta_n: f64,
        #[arg(long, default_value_t = 0.0)]
        phi_n: f64,
        #[arg(long, value_enum, default_value_t = PhysicsArg::Cqd)]
        physics: PhysicsArg,
        #[arg(long, value_enum, default_value_t = FieldArg::Static)]
        field: FieldArg,
        /// Static field strength along z, T.
        #[arg(long, default_value_t = -1e-3, allow_hyphen_values = true)]
        bz: f64,
        /// Wire current for the quadrupole field, A (default from config).
        #[arg(long)]
        current: Option<f64>,
        /// End time, s; the quadrupole run spans [-t_end, t_end].
        #[arg(long, default_value_t = 1e-6)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Induction factor (overrides the config file).
        #[arg(long)]
        ki: Option<f64>,
        /// Hold the nuclear angles fixed.
        #[arg(long)]
        freeze_nucleus: bool,
        /// Drop the nuclear field acting on the electron.
        #[arg(long)]
        no_nuclear_field: bool,
        /// Drop the electron field acting on the nucleus.
        #[arg(long)]
        no_electron_field: bool,
    },
    /// Numerical two-level flip probability against the exponential law (CSV).
    SchrodingerCheck {
        /// Coupling strengths to test.
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.5,1,2")]
        k: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Coupling::K0)]
        coupling: Coupling,
        /// Nuclear azimuthal rate for the transverse coupling.
        #[arg(long, default_value_t = 20.0)]
        w_n: f64,
        /// Half-width of the dimensionless time window.
        #[arg(long, default_value_t = 20.0)]
        window: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Internal-field coefficients for the three electron densities (CSV).
    Fields,
    /// Sequential z-then-x measurement uncertainty over an N x N grid (JSON).
    Uncertainty {
        #[arg(long, default_value_t = 100)]
        grid: usize,
    },
    /// Two-stage measurement at relative angle alpha (JSON).
    TwoStage {
        #[arg(long)]
        alpha: f64,
        /// Also run a Monte Carlo estimate with this many samples.
        #[arg(long)]
        mc: Option<usize>,
    },
    /// Anticorrelation of random entangled pairs (JSON).
    Entangle {
        #[arg(long, default_value_t = 100_000)]
        n: usize,
    },
}

fn parse_curve(s: &str) -> Result<Curve, String> {
    Curve::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Curve::ALL.iter().map(|c| c.name()).collect();
        format!("unknown model `{s}`; expected one of {}", names.join(", "))
    })
}

/// Invalid combination of otherwise well-formed arguments.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

enum Output {
    Table(Table),
    Record(Value),
    Svg(String),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Scan { .. } => "scan",
            Command::Stats { .. } => "stats",
            Command::FitKi { .. } => "fit-ki",
            Command::McCollapse { .. } => "mc-collapse",
            Command::Simulate { .. } => "simulate",
            Command::SchrodingerCheck { .. } => "schrodinger-check",
            Command::Fields => "fields",
            Command::Uncertainty { .. } => "uncertainty",
            Command::TwoStage { .. } => "two-stage",
            Command::Entangle { .. } => "entangle",
        }
    }

    fn ki_flag(&self) -> Option<f64> {
        match self {
            Command::Scan { ki, .. } | Command::Simulate { ki, .. } => *ki,
            _ => None,
        }
    }
}

fn provenance(cli: &Cli, cfg: &Resolved) -> String {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let a = &cfg.atom;
    let p = &cfg.apparatus;
    let source = cfg.source.as_ref().map_or("built-in defaults".to_string(), |p| p.display().to_string());
    let lines = [
        format!("cqd {}", env!("CARGO_PKG_VERSION")),
        format!("command: {}", cli.command.name()),
        format!("argv: {}", args.join(" ")),
        format!("config: {source}"),
        format!("seed: {}", cfg.seed),
        format!("kappa: {}", fmt_g(cfg.kappa)),
        format!("k_i: {}", fmt_g(cfg.k_i)),
        format!(
            "atom: gamma_e={} gamma_n={} mu_e={} mu_n={} radius={} b_n={} b_e={}",
            fmt_g(a.gamma_e),
            fmt_g(a.gamma_n),
            fmt_g(a.mu_e),
            fmt_g(a.mu_n),
            fmt_g(a.radius),
            fmt_g(a.b_n),
            fmt_g(a.b_e)
        ),
        format!(
            "apparatus: z_a={} v={} b_r={} flight_path={} current={}",
            fmt_g(p.z_a),
            fmt_g(p.v),
            fmt_g(p.b_r),
            fmt_g(p.flight_path),
            fmt_g(p.current)
        ),
    ];
    lines.iter().map(|l| format!("# {l}\n")).collect()
}

fn to_value<T: serde::Serialize>(v: &T) -> anyhow::Result<Value> {
    serde_json::to_value(v).context("serializing result")
}

fn flip_table(rows: &[cqd_core::flip::FlipRow]) -> Table {
    let mut t = Table::new(&cqd_core::flip::FlipRow::HEADER);
    for r in rows {
        t.push(r.values().iter().map(|&v| Cell::Num(v)).collect());
    }
    t
}

fn flip_chart(rows: &[cqd_core::flip::FlipRow], data: Option<&cqd_core::stats::Dataset>) -> String {
    let names = ["W_m", "W_rabi", "W1", "W2", "W3", "W4", "W_cqd"];
    let lines: Vec<svg::Series> = names
        .iter()
        .enumerate()
        .map(|(k, name)| svg::Series {
            label: name.to_string(),
            points: rows.iter().map(|r| (r.current, r.values()[5 + k])).collect(),
        })
        .collect();
    let scatter = data.map(|d| svg::Series {
        label: "data".into(),
        points: d.rows.clone(),
    });
    svg::log_x_chart("Spin-flip fraction", "wire current I (A)", &lines, scatter.as_ref())
}

fn dist_of(d: Dist) -> AngularDistribution {
    match d {
        Dist::Iso => AngularDistribution::isotropic(),
        Dist::Heart => AngularDistribution::heart(),
    }
}

fn run_command(cli: &Cli, cfg: &Resolved, format: Format) -> anyhow::Result<Output> {
    let exec = Execution::default();
    let model = FlipModel::new(cfg.atom, cfg.apparatus).with_k_i(cfg.k_i);
    Ok(match &cli.command {
        Command::Scan {
            i_min,
            i_max,
            points,
            svg: svg_path,
            data,
            ..
        } => {
            let curve = scan(&model, *i_min, *i_max, *points, exec)?;
            let dataset = data.as_deref().map(load_dataset).transpose()?;
            if let Some(path) = svg_path {
                write_file(path, &flip_chart(&curve.rows, dataset.as_ref()))?;
            }
            if format == Format::Svg {
                Output::Svg(flip_chart(&curve.rows, dataset.as_ref()))
            } else {
                Output::Table(flip_table(&curve.rows))
            }
        }
        Command::Stats { data, model: curve } => {
            let dataset = load_dataset(data)?;
            let report = curve_report(&dataset, &model, *curve)?;
            let mut v = to_value(&report)?;
            v["model"] = json!(curve.name());
            Output::Record(v)
        }
        Command::FitKi { data } => {
            let dataset = load_dataset(data)?;
            Output::Record(to_value(&fit_ki(&dataset, &model)?)?)
        }
        Command::McCollapse { theta_e, dist, n } => {
            let d = dist_of(*dist);
            let est = flip_probability_mc(*theta_e, &d, *n, cfg.seed, exec)?;
            Output::Record(json!({
                "estimate": est.estimate,
                "stderr": est.stderr,
                "n": est.n,
                "analytic": flip_probability(*theta_e, &d),
                "theta_e": theta_e,
                "dist": format!("{dist:?}").to_lowercase(),
                "seed": cfg.seed,
            }))
        }
        Command::Simulate {
            theta_e,
            phi_e,
            theta_n,
            phi_n,
            physics,
            field,
            bz,
            current,
            t_end,
            tol,
            freeze_nucleus,
            no_nuclear_field,
            no_electron_field,
            ..
        } => {
            let dyn_cfg = DynamicsConfig {
                k_i: cfg.k_i,
                physics: match physics {
                    PhysicsArg::Bloch => Physics::Bloch,
                    PhysicsArg::Llg => Physics::Llg,
                    PhysicsArg::Cqd => Physics::Cqd,
                },
                include_b_n: !no_nuclear_field,
                include_b_e: !no_electron_field,
                freeze_nucleus: *freeze_nucleus,
            };
            if !(*t_end > 0.0) {
                return Err(UsageError(format!("--t-end must be positive, got {t_end}")).into());
            }
            let s0 = SpinState::new(*theta_e, *phi_e, *theta_n, *phi_n);
            let traj = match field {
                FieldArg::Static => {
                    let b = [0.0, 0.0, *bz];
                    integrate_spin(s0, |_| b, (0.0, *t_end), &cfg.atom, &dyn_cfg, *tol)?
                }
                FieldArg::Quadrupole => {
                    let app: ApparatusParams = cfg.apparatus.with_current(current.unwrap_or(cfg.apparatus.current));
                    let f = chamber_field(&app, app.b_r)?;
                    integrate_spin(s0, |t| quadrupole_at(&f, t, app.v), (-*t_end, *t_end), &cfg.atom, &dyn_cfg, *tol)?
                }
            };
            let mut t = Table::new(&["t", "theta_e", "phi_e", "theta_n", "phi_n"]);
            for (time, s) in traj {
                t.push(vec![
                    Cell::Num(time),
                    Cell::Num(s.theta_e),
                    Cell::Num(s.phi_e),
                    Cell::Num(s.theta_n),
                    Cell::Num(s.phi_n),
                ]);
            }
            Output::Table(t)
        }
        Command::SchrodingerCheck {
            k,
            coupling,
            w_n,
            window,
            tol,
        } => {
            let mut t = Table::new(&["k", "coupling", "f2_numeric", "f2_boundary", "f2_closed", "rel_error", "norm_drift"]);
            for &kv in k {
                let (k0, k1, w, label) = match coupling {
                    Coupling::K0 => (kv, 0.0, 0.0, "k0"),
                    Coupling::K1 => (0.0, kv, *w_n, "k1"),
                };
                let out = integrate_two_level(k0, k1, 0.0, w, *window, *tol)?;
                let closed = (-PI * kv / 2.0).exp();
                let numeric = out.asymptotic.f.norm_sqr();
                t.push(vec![
                    Cell::Num(kv),
                    Cell::Text(label.into()),
                    Cell::Num(numeric),
                    Cell::Num(out.boundary.f.norm_sqr()),
                    Cell::Num(closed),
                    Cell::Num((numeric - closed).abs() / closed),
                    Cell::Num(out.norm_drift),
                ]);
            }
            Output::Table(t)
        }
        Command::Fields => {
            let r = cfg.atom.radius;
            let densities = [RadialDensity::gaussian(r), load_hartree_table(), RadialDensity::tophat(r)];
            let mut t = Table::new(&["density", "average", "kappa"]);
            for d in &densities {
                t.push(vec![
                    Cell::Text(d.kind.name().into()),
                    Cell::Text("torque".into()),
                    Cell::Num(torque_avg_coefficient(d)?),
                ]);
                t.push(vec![
                    Cell::Text(d.kind.name().into()),
                    Cell::Text("self".into()),
                    Cell::Num(self_avg_coefficient(d)?),
                ]);
            }
            Output::Table(t)
        }
        Command::Uncertainty { grid } => Output::Record(to_value(&uncertainty_grid(*grid)?)?),
        Command::TwoStage { alpha, mc } => {
            let mut v = to_value(&two_stage_probability(*alpha)?)?;
            if let Some(n) = mc {
                let est = two_stage_mc(*alpha, *n, cfg.seed, exec)?;
                v["mc"] = to_value(&est)?;
                v["seed"] = json!(cfg.seed);
            }
            Output::Record(v)
        }
        Command::Entangle { n } => {
            let mut v = to_value(&entangle_mc(*n, cfg.seed, exec)?)?;
            v["seed"] = json!(cfg.seed);
            Output::Record(v)
        }
    })
}

fn default_format(command: &Command) -> Format {
    match command {
        Command::Scan { .. } | Command::Simulate { .. } | Command::SchrodingerCheck { .. } | Command::Fields => {
            Format::Csv
        }
        _ => Format::Json,
    }
}

fn render(output: Output, format: Format) -> anyhow::Result<String> {
    Ok(match (output, format) {
        (Output::Table(t), Format::Csv) => t.to_csv(),
        (Output::Table(t), Format::Json) => canonical_json(&t.to_json()),
        (Output::Record(v), Format::Json) => canonical_json(&v),
        (Output::Record(v), Format::Csv) => flatten_record(&v).to_csv(),
        (Output::Svg(s), _) => s,
        (_, Format::Svg) => bail!(UsageError("svg output is only available for `scan`".into())),
    })
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text)
        .map_err(CqdError::from)
        .with_context(|| format!("writing {}", path.display()))
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = config::resolve(cli.config.as_deref(), cli.seed, cli.command.ki_flag())?;
    let format = cli.format.unwrap_or_else(|| default_format(&cli.command));
    if format == Format::Svg && !matches!(cli.command, Command::Scan { .. }) {
        bail!(UsageError("svg output is only available for `scan`".into()));
    }
    eprint!("{}", provenance(cli, &cfg));
    let text = render(run_command(cli, &cfg, format)?, format)?;
    match &cli.out {
        Some(path) => write_file(path, &text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(CqdError::from)?;
            Ok(())
        }
    }
}

/// 1 for usage and configuration problems, 2 for data and numeric failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() || cause.is::<ConfigError>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<CqdError>() {
            return match e {
                CqdError::Domain(_) | CqdError::Config(_) => 1,
                _ => 2,
            };
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
