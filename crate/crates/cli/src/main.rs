mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use config::{RunConfig, WORKERS_ENV};
use output::{render_csv, render_json, Envelope};

/// Error with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError { kind: "validation", message: msg.into(), code: 1 }
    }
}

impl From<petersson::Error> for CliError {
    fn from(e: petersson::Error) -> Self {
        match e {
            petersson::Error::Validation(m) => CliError { kind: "validation", message: m, code: 1 },
            petersson::Error::Unsupported(m) => CliError { kind: "unsupported", message: m, code: 1 },
            petersson::Error::Resource(m) => CliError { kind: "resource", message: m, code: 2 },
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "petersson", version, about = "Geometric side of the Petersson trace formula over Q and real quadratic fields")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the document here and print a summary on stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (also PETERSSON_WORKERS).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Default)]
struct FieldArgs {
    /// Radicand of Q(sqrt d); 1 selects Q.
    #[arg(long, allow_hyphen_values = true)]
    d: Option<i64>,
    /// Degree (1 or 2).
    #[arg(long)]
    r: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct FormArgs {
    #[arg(long, allow_hyphen_values = true)]
    m1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    m2: Option<String>,
    /// Multiply m1 and m2 by the inverse of the different generator.
    #[arg(long)]
    times_dinv: bool,
}

#[derive(Args, Debug, Default)]
struct TailArgs {
    #[arg(long)]
    rel_target: Option<f64>,
    /// Comma-separated cutoffs R_j.
    #[arg(long, value_delimiter = ',')]
    cutoffs: Option<Vec<f64>>,
    #[arg(long)]
    point_budget: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct ScheduleArgs {
    /// Level as a positive integer.
    #[arg(long)]
    level: Option<String>,
    #[arg(long)]
    p: Option<i64>,
    /// Largest odd exponent; all odd l up to it are used.
    #[arg(long)]
    l_max: Option<u32>,
    /// Explicit comma-separated exponents.
    #[arg(long, value_delimiter = ',')]
    l: Option<Vec<u32>>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Field data: discriminant, unit, different, class numbers.
    FieldInfo {
        #[command(flatten)]
        field: FieldArgs,
    },
    /// Shortest vectors and box set of a principal ideal.
    ShortestVector {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, allow_hyphen_values = true)]
        level_gen: Option<String>,
    },
    /// Exact Kloosterman sum S(m1, m2; n; c).
    Kloosterman {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        forms: FormArgs,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        n: Option<String>,
        #[arg(long)]
        pair_budget: Option<u64>,
        /// Decide S = 0 exactly in the cyclotomic ring.
        #[arg(long)]
        exact_zero_test: bool,
    },
    /// J_a(x) with error estimates.
    Bessel {
        #[arg(long)]
        order: Option<u32>,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
    },
    /// Bessel bound checks over a grid of orders.
    BesselSuite {
        /// i, iii, iv or v.
        #[arg(long)]
        check: Option<String>,
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<u32>>,
    },
    /// Geometric side report for one weight vector.
    GeomSide {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        forms: FormArgs,
        #[arg(long, allow_hyphen_values = true)]
        level_gen: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        hecke: Option<String>,
        /// Comma-separated even weights.
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<u32>>,
        #[command(flatten)]
        tail: TailArgs,
    },
    /// Weights placing the box-term arguments in the transition window.
    WeightSchedule {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        sched: ScheduleArgs,
    },
    /// Geometric side along a weight schedule.
    DecaySweep {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        sched: ScheduleArgs,
        #[command(flatten)]
        tail: TailArgs,
    },
    /// Level-one ratio test against exact Fourier coefficients.
    Oracle {
        #[arg(long)]
        pairs: Option<String>,
        #[arg(long)]
        k: Option<u32>,
    },
    /// Discrepancy of a discrete measure against a reference measure.
    Discrepancy {
        /// CSV file of `x,w` atoms.
        #[arg(long)]
        atoms: Option<String>,
        /// sato-tate or mu-p.
        #[arg(long = "ref")]
        reference: Option<String>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        normalize: bool,
    },
}

fn set<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

fn apply_field(cfg: &mut RunConfig, f: FieldArgs) {
    set(&mut cfg.field.d, f.d);
    set(&mut cfg.field.r, f.r);
}

fn apply_forms(cfg: &mut RunConfig, f: FormArgs) {
    set(&mut cfg.forms.m1, f.m1);
    set(&mut cfg.forms.m2, f.m2);
    if f.times_dinv {
        cfg.forms.times_dinv = Some(true);
    }
}

fn apply_tail(cfg: &mut RunConfig, t: TailArgs) {
    set(&mut cfg.run.rel_target, t.rel_target);
    set(&mut cfg.ranges.cutoffs, t.cutoffs);
    set(&mut cfg.run.point_budget, t.point_budget);
}

fn apply_schedule(cfg: &mut RunConfig, s: ScheduleArgs) {
    set(&mut cfg.level.s, s.level);
    set(&mut cfg.prime.p, s.p);
    if s.l_max.is_some() {
        cfg.ranges.l = None;
        cfg.ranges.l_max = s.l_max;
    }
    set(&mut cfg.ranges.l, s.l);
}

/// Merge flags into the config; returns the command name and the zero-test switch.
fn merge(cfg: &mut RunConfig, cmd: Command) -> (&'static str, bool) {
    match cmd {
        Command::FieldInfo { field } => {
            apply_field(cfg, field);
            ("field-info", false)
        }
        Command::ShortestVector { field, level_gen } => {
            apply_field(cfg, field);
            set(&mut cfg.level.s, level_gen);
            ("shortest-vector", false)
        }
        Command::Kloosterman { field, forms, c, n, pair_budget, exact_zero_test } => {
            apply_field(cfg, field);
            apply_forms(cfg, forms);
            set(&mut cfg.forms.c, c);
            set(&mut cfg.level.n, n);
            set(&mut cfg.run.pair_budget, pair_budget);
            ("kloosterman", exact_zero_test)
        }
        Command::Bessel { order, x } => {
            set(&mut cfg.bessel.order, order);
            set(&mut cfg.bessel.x, x);
            ("bessel", false)
        }
        Command::BesselSuite { check, grid } => {
            set(&mut cfg.bessel.check, check);
            set(&mut cfg.bessel.grid, grid);
            ("bessel-suite", false)
        }
        Command::GeomSide { field, forms, level_gen, hecke, k, tail } => {
            apply_field(cfg, field);
            apply_forms(cfg, forms);
            set(&mut cfg.level.s, level_gen);
            set(&mut cfg.level.n, hecke);
            set(&mut cfg.ranges.k, k);
            apply_tail(cfg, tail);
            ("geom-side", false)
        }
        Command::WeightSchedule { field, sched } => {
            apply_field(cfg, field);
            apply_schedule(cfg, sched);
            ("weight-schedule", false)
        }
        Command::DecaySweep { field, sched, tail } => {
            apply_field(cfg, field);
            apply_schedule(cfg, sched);
            apply_tail(cfg, tail);
            ("decay-sweep", false)
        }
        Command::Oracle { pairs, k } => {
            set(&mut cfg.oracle.pairs, pairs);
            set(&mut cfg.oracle.k, k);
            ("oracle", false)
        }
        Command::Discrepancy { atoms, reference, p, normalize } => {
            set(&mut cfg.discrepancy.atoms, atoms);
            set(&mut cfg.discrepancy.reference, reference);
            set(&mut cfg.discrepancy.p, p);
            if normalize {
                cfg.discrepancy.normalize = Some(true);
            }
            ("discrepancy", false)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(f) = cli.format {
        cfg.output.format = Some(match f {
            Format::Json => "json".into(),
            Format::Csv => "csv".into(),
        });
    }
    if let Some(p) = &cli.out {
        cfg.output.path = Some(p.display().to_string());
    }
    set(&mut cfg.run.workers, cli.workers);
    let (name, zero_test) = merge(&mut cfg, cli.command);
    let mut cfg = cfg.resolve(std::env::var(WORKERS_ENV).ok())?;
    let workers = cfg.run.workers.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::validation(format!("cannot start worker pool: {e}")))?;
    cfg.run.workers = Some(pool.current_num_threads());

    let out = pool.install(|| match name {
        "field-info" => commands::field_info(&cfg),
        "shortest-vector" => commands::shortest_vector(&cfg),
        "kloosterman" => commands::kloosterman(&cfg, zero_test),
        "bessel" => commands::bessel(&cfg),
        "bessel-suite" => commands::bessel_suite(&cfg),
        "geom-side" => commands::geom_side(&cfg),
        "weight-schedule" => commands::weight_schedule_cmd(&cfg),
        "decay-sweep" => commands::decay_sweep_cmd(&cfg),
        "oracle" => commands::oracle(&cfg),
        _ => commands::discrepancy(&cfg),
    })?;

    let hash = cfg.hash(name);
    let env = Envelope {
        command: name,
        version: env!("CARGO_PKG_VERSION"),
        config_hash: &hash,
        config: serde_json::to_value(&cfg).unwrap_or_default(),
    };
    let doc = match cfg.output.format.as_deref() {
        Some("csv") => render_csv(&env, &out)?,
        _ => render_json(&env, &out)?,
    };
    match &cfg.output.path {
        Some(p) => {
            std::fs::write(p, doc).map_err(|e| CliError::validation(format!("cannot write {p}: {e}")))?;
            println!("{} [{name} {} config {}] -> {p}", out.summary, env.version, &hash[..12]);
        }
        None => print!("{doc}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::validation(e.to_string().trim().to_string());
            eprintln!("{}", serde_json::json!({ "error": { "kind": err.kind, "message": err.message } }));
            return ExitCode::from(err.code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": { "kind": e.kind, "message": e.message } }));
            ExitCode::from(e.code)
        }
    }
}
