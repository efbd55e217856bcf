use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crcurv_core::catalog::catalog;
use crcurv_core::chartfile::emit_chart_file;
use crcurv_core::report::tally;
use crcurv_core::runner::{render, run, CheckKind, Format, RunConfig, Sampling};

const EXIT_CONFIG: u8 = 2;
const EXIT_COMPUTATION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "crcurv",
    version,
    about = "Curvature invariants and inequality checks for CR-submanifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in charts and their known closed-form values.
    Catalog {
        /// Also write every entry as a chart file into this directory.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Evaluate checks and invariants at sample points of a chart.
    Run(RunArgs),
    /// Describe one check.
    Explain {
        /// One of the check ids listed by `crcurv explain --list`.
        id: Option<String>,
        #[arg(long)]
        list: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Jsonl,
    Csv,
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML run configuration; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `<catalog name>:<params>` or `file:<path>`.
    #[arg(long)]
    chart: Option<String>,
    /// Check selection, repeatable: `all`, `<id>` or `<id>:<param>`.
    #[arg(long = "check")]
    checks: Vec<String>,
    /// Invariant selection, repeatable, e.g. `delta_m:+:1,1`.
    #[arg(long = "invariant")]
    invariants: Vec<String>,
    /// Number of seeded random points.
    #[arg(long, conflicts_with = "grid")]
    points: Option<usize>,
    /// Cell-centred grid with this many points per axis.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol_slack: Option<f64>,
    #[arg(long)]
    tol_eq: Option<f64>,
    #[arg(long)]
    tol_diag: Option<f64>,
    #[arg(long)]
    tol_rank: Option<f64>,
    #[arg(long)]
    tol_cr: Option<f64>,
    #[arg(long)]
    tol_phi: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    sweeps: Option<usize>,
    /// Oracle samples attached to each optimized quantity.
    #[arg(long)]
    certify: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    jobs: Option<usize>,
}

fn build_config(args: RunArgs) -> Result<RunConfig, String> {
    let mut cfg = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            RunConfig::from_toml(&text).map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => {
            let mut c = RunConfig::default();
            if let Some(j) = std::env::var("CRCURV_JOBS")
                .ok()
                .and_then(|v| v.parse().ok())
            {
                c.jobs = j;
            }
            c
        }
    };
    if let Some(c) = args.chart {
        cfg.chart = c;
    }
    if !args.checks.is_empty() {
        cfg.checks = args.checks;
    }
    if !args.invariants.is_empty() {
        cfg.invariants = args.invariants;
    }
    if let Some(n) = args.points {
        cfg.sampling = Sampling::Random { count: n };
    }
    if let Some(n) = args.grid {
        cfg.sampling = Sampling::Grid { per_axis: n };
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let tol = &mut cfg.tol;
    for (slot, v) in [
        (&mut tol.slack, args.tol_slack),
        (&mut tol.eq, args.tol_eq),
        (&mut tol.diag, args.tol_diag),
        (&mut tol.rank, args.tol_rank),
        (&mut tol.cr, args.tol_cr),
        (&mut tol.phi, args.tol_phi),
    ] {
        if let Some(v) = v {
            *slot = v;
        }
    }
    if let Some(r) = args.restarts {
        cfg.opt.restarts = r;
    }
    if let Some(s) = args.sweeps {
        cfg.opt.max_sweeps = s;
    }
    if let Some(n) = args.certify {
        cfg.certify_samples = n;
    }
    if let Some(o) = args.out {
        cfg.out = Some(o);
    }
    if let Some(f) = args.format {
        cfg.format = match f {
            FormatArg::Jsonl => Format::Jsonl,
            FormatArg::Csv => Format::Csv,
        };
    }
    if let Some(j) = args.jobs {
        cfg.jobs = j;
    }
    Ok(cfg)
}

fn cmd_run(args: RunArgs) -> ExitCode {
    let cfg = match build_config(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let bytes = match render(&outcome.records, cfg.format) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_COMPUTATION);
        }
    };
    let written = match &cfg.out {
        Some(p) => std::fs::write(p, &bytes).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print_out(&String::from_utf8_lossy(&bytes));
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_COMPUTATION);
    }
    let counts = tally(&outcome.records);
    let summary: Vec<String> = counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
    eprintln!(
        "{}: {} records ({})",
        cfg.chart,
        outcome.records.len(),
        summary.join(", ")
    );
    for r in outcome
        .records
        .iter()
        .filter(|r| r.is_error() || r.failed())
        .take(5)
    {
        let line = crcurv_core::report::json_line(r).unwrap_or_default();
        eprintln!("  {line}");
    }
    ExitCode::from(outcome.status.exit_code() as u8)
}

fn print_out(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn cmd_catalog(emit: Option<PathBuf>) -> ExitCode {
    let mut text = String::new();
    if let Some(dir) = &emit {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("error: {}: {e}", dir.display());
            return ExitCode::from(EXIT_COMPUTATION);
        }
    }
    for e in catalog() {
        text.push_str(&format!(
            "{}  (d={}, l={}, C^{})\n    {}\n",
            e.spec(),
            e.chart.declared_d(),
            e.chart.declared_l(),
            e.ambient.complex_dim(),
            e.doc
        ));
        let center = e.chart.center();
        for x in &e.expected {
            text.push_str(&format!(
                "    {} = {:.6} at the box center ({})\n",
                x.quantity.name(),
                x.value_at(&center),
                x.reason
            ));
        }
        if let Some(dir) = &emit {
            let file = dir.join(format!("{}.chart", e.spec().replace([':', ','], "_")));
            if let Err(err) =
                std::fs::write(&file, emit_chart_file(&e.chart, &e.ambient, Some(&e.doc)))
            {
                eprintln!("error: {}: {err}", file.display());
                return ExitCode::from(EXIT_COMPUTATION);
            }
        }
    }
    print_out(&text);
    ExitCode::SUCCESS
}

fn explanation(kind: CheckKind) -> &'static str {
    match kind {
        CheckKind::TheoremV => {
            "\
theorem_V[:n1,...,nk]  (k >= 2, s = n1+...+nk <= d)
  delta+_m(n) <= ambient delta+_m(n) + (k-1)/(2k) * M
  M = script_H_D(s)^2 when s < d, |H_D|^2 when s = d.
  Equality needs: h vanishing between blocks, equal block mean curvatures
  H_1 = ... = H_k, |H_V| = script_H_D(s), and the ambient term attained.
  Without a parameter every tuple fitting in D is checked."
        }
        CheckKind::CurvatureBound => {
            "\
curvature_bound[:n1,...,nk]
  Same left side as theorem_V, with the ambient term replaced by
  (c/2)(s^2 - sum n_i^2) for an upper bound c of the ambient sectional
  curvature (0 for flat, max(c, 4c) for constant holomorphic curvature 4c).
  The bound is verified on 1000 seeded ambient planes first."
        }
        CheckKind::ChenType => {
            "\
chen_type[:n1,...,nk]
  delta_D(n) <= d^2 (d+k-1-s) / (2(d+k-s)) |H_D|^2 + (c/2)[d(d-1) - sum n_i(n_i-1)]
  with delta_D(n) = (tau_D - min sum tau(V_i)) / 2 over tuples in D."
        }
        CheckKind::Supplement => {
            "\
supplement[:k]  (2 <= k <= d-1)
  delta-_m(k) <= (k-1)/(k+1) ambient delta+_m(k+1) + k(k-1)/(2(k+1)^2) |H_D|^2
  Every pair of blocks of a (k+1)-tuple survives in k-1 of its k+1
  leave-one-out k-tuples, so (k+1) delta-_m(k) <= (k-1) S_m(V_1..V_{k+1});
  the theorem_V bound with s = d finishes the estimate.
  The weaker-looking variant (k-1)/(2k(k+1)) |H_D|^2 + ambient delta+_m(k+1)
  is reported under info.alternative_rhs; on the unit 5-sphere with k = 3
  it evaluates to 4/3 while the left side is 3."
        }
        CheckKind::MixedScalar => {
            "\
mixed_scalar
  S_m(D, D_perp) <= |H|^2 / 4 + ambient delta+_m(d, l)
  with H the mean curvature of the whole tangent space. Equality needs h
  vanishing on D x D_perp and H_D = H_perp. On the unit 3-sphere in C^2
  the sides are 2 and 9/4; on the unit 4-sphere in C^3 both are 4."
        }
        CheckKind::Holomorphic => {
            "\
holomorphic[:k]  (2 <= k <= d/2)
  delta+_h(k) <= ambient delta+_h(k) + (k-1)/(4k) * M
  M = script_H_D(2k)^2 when 2k < d, |H_D|^2 when 2k = d; the left side is
  the largest S_h over k orthogonal phi-invariant planes of D."
        }
        CheckKind::CorollaryC03 => {
            "\
corollary_C03  (flat ambient)
  For s = 2..d: Delta_bar(s) <= script_H_D(s)^2 (s < d), <= |H_D|^2 (s = d),
  where Delta(n) = 2k/(k-1) delta+_m(n) and Delta_bar(s) maximizes it over
  tuples with total size s and at least two blocks."
        }
        CheckKind::DMinimality => {
            "\
d_minimality  (flat ambient, one record per run)
  Reports max |H_D| over the samples and the positivity witnesses
  delta+_m over tuples filling D, max_k delta-_m(k), S_m(D, D_perp) and,
  when d >= 4, delta+_h(d/2). Each witness is non-positive wherever
  H_D = 0, so CONTRADICTION (H_D = 0 at every sample with some witness
  positive) signals a pipeline fault."
        }
    }
}

fn cmd_explain(id: Option<String>, list: bool) -> ExitCode {
    if list || id.is_none() {
        let ids: Vec<&str> = CheckKind::ALL.iter().map(|k| k.id()).collect();
        print_out(&format!("{}\n", ids.join("\n")));
        return ExitCode::SUCCESS;
    }
    let id = id.unwrap_or_default();
    match CheckKind::from_id(&id) {
        Some(k) => {
            print_out(&format!("{}\n", explanation(k)));
            ExitCode::SUCCESS
        }
        None => {
            eprintln!("error: unknown check `{id}`; try `crcurv explain --list`");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Catalog { emit } => cmd_catalog(emit),
        Command::Run(args) => cmd_run(args),
        Command::Explain { id, list } => cmd_explain(id, list),
    }
}
