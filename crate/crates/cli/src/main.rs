use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use esspec::commands::{self, EXIT_ERROR, EXIT_NOT_CERTIFIED, EXIT_OK};
use esspec::config::{self, Domain, ProblemConfig, StellarConfig, SCHEMA_VERSION};
use esspec::gallery;
use esspec::output::write_atomic;
use esspec::Pool;

/// Essential spectrum of singular 2×2 block Sturm–Liouville operators.
#[derive(Parser)]
#[command(name = "esspec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the essential spectrum; writes report.json and curves/*.csv.
    Analyze {
        #[arg(short = 'c', long)]
        config: PathBuf,
        #[arg(short = 'o', long, default_value = "esspec-out")]
        out: PathBuf,
    },
    /// Eigenvalue-counting check of a half-line analysis; writes growth.csv and report.json.
    Validate {
        #[arg(short = 'c', long)]
        config: PathBuf,
        #[arg(short = 'o', long, default_value = "esspec-out")]
        out: PathBuf,
    },
    /// List or run the bundled examples.
    Gallery(GalleryArgs),
    /// Solve the Lane–Emden equation and analyse the polytropic stellar operator.
    LaneEmden(LaneEmdenArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct GalleryMode {
    #[arg(long)]
    list: bool,
    #[arg(long)]
    run_all: bool,
    /// Run one entry by id.
    #[arg(long, value_name = "ID")]
    run: Option<String>,
    /// Print an entry's config JSON.
    #[arg(long, value_name = "ID")]
    show: Option<String>,
}

#[derive(Args)]
struct GalleryArgs {
    #[command(flatten)]
    mode: GalleryMode,
    #[arg(short = 'o', long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LaneEmdenArgs {
    /// Polytropic index, 0 < n < 5.
    #[arg(long)]
    n: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    alpha: Option<f64>,
    /// Γ₁ as an expression in r (default 5/3).
    #[arg(long)]
    gamma1: Option<String>,
    /// Sound-speed-type constant, c ≥ √3 (default √3).
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    p_c: Option<f64>,
    #[arg(long)]
    rho_c: Option<f64>,
    /// Buoyancy A as an expression in r (default 0).
    #[arg(long)]
    buoyancy: Option<String>,
    /// Rows of theta.csv.
    #[arg(long, default_value_t = 1001)]
    points: usize,
    #[arg(short = 'o', long, default_value = "lane-emden-out")]
    out: PathBuf,
}

fn fail(e: impl std::fmt::Display) -> u8 {
    eprintln!("error: {e}");
    EXIT_ERROR
}

fn analyze(config: PathBuf, out: PathBuf, pool: &Pool) -> u8 {
    let res = match commands::read_config(&config) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let a = match commands::run_analysis(&res, pool) {
        Ok(a) => a,
        Err(e) => return fail(e),
    };
    if let Err(e) = a.write(&out) {
        return fail(e);
    }
    println!("{}", a.report.certification);
    a.exit_code()
}

fn validate(config: PathBuf, out: PathBuf, pool: &Pool) -> u8 {
    let res = match commands::read_config(&config) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let (a, table) = match commands::run_validation(&res, pool) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let written = a.write(&out).and_then(|_| {
        write_atomic(
            &out.join("growth.csv"),
            esspec::output::growth_csv(&table).as_bytes(),
        )
    });
    if let Err(e) = written {
        return fail(e);
    }
    for row in &table.rows {
        println!(
            "[{:>10.4}, {:>10.4})  slope {:>8.4}  {}",
            row.window.lo,
            row.window.hi,
            row.slope,
            row.verdict.label()
        );
    }
    if commands::growth_consistent(&table) {
        EXIT_OK
    } else {
        EXIT_NOT_CERTIFIED
    }
}

fn print_run(r: &commands::GalleryRun) {
    println!("{:<28} {:<6} {}", r.id, r.status.label(), r.detail);
}

fn gallery_cmd(args: GalleryArgs, pool: &Pool) -> u8 {
    let m = args.mode;
    if m.list {
        for e in gallery::ENTRIES {
            let x = if e.xfail.is_some() { " [xfail]" } else { "" };
            println!("{:<28} {}{x}", e.id, e.summary);
        }
        return EXIT_OK;
    }
    if let Some(id) = m.show {
        return match gallery::find(&id) {
            Some(e) => {
                print!("{}", e.source());
                EXIT_OK
            }
            None => fail(format!("unknown gallery id `{id}`")),
        };
    }
    if let Some(id) = m.run {
        let Some(e) = gallery::find(&id) else {
            return fail(format!("unknown gallery id `{id}`"));
        };
        let r = commands::run_gallery_entry(e, pool);
        if let (Some(dir), Some(a)) = (&args.out, &r.analysis) {
            if let Err(e) = a.write(dir) {
                return fail(e);
            }
        }
        print_run(&r);
        return if r.status.is_ok() {
            EXIT_OK
        } else {
            EXIT_ERROR
        };
    }
    let runs = match commands::run_all(args.out.as_deref(), pool) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    for r in &runs {
        print_run(r);
    }
    let bad = runs.iter().filter(|r| !r.status.is_ok()).count();
    println!(
        "{} entries, {} ok, {} failing",
        runs.len(),
        runs.len() - bad,
        bad
    );
    if bad == 0 {
        EXIT_OK
    } else {
        EXIT_ERROR
    }
}

fn lane_emden(a: LaneEmdenArgs, pool: &Pool) -> u8 {
    let cfg = ProblemConfig {
        schema_version: SCHEMA_VERSION,
        domain: Some(Domain::Stellar),
        coefficients: None,
        parameters: Default::default(),
        analysis: Default::default(),
        validation: Default::default(),
        stellar: Some(StellarConfig {
            n: a.n,
            gamma1: a.gamma1,
            c: a.c,
            p_c: a.p_c,
            rho_c: a.rho_c,
            buoyancy: a.buoyancy,
            alpha: a.alpha,
            tol: Some(a.tol),
            table_points: Some(a.points),
        }),
        gallery_id: None,
    };
    let res = match config::resolve(cfg) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let an = match commands::run_analysis(&res, pool) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    if let Err(e) = an.write(&a.out) {
        return fail(e);
    }
    // top-level copy of the θ table for convenience
    if let Some((_, theta)) = an.files.iter().find(|(n, _)| n == "curves/theta.csv") {
        if let Err(e) = write_atomic(&a.out.join("theta.csv"), theta.as_bytes()) {
            return fail(e);
        }
    }
    if let Some(s) = &an.report.diagnostics.stellar {
        println!("R = {}", s.radius.0);
    }
    println!("{}", an.report.certification);
    an.exit_code()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = Pool::from_env();
    let code = match cli.command {
        Command::Analyze { config, out } => analyze(config, out, &pool),
        Command::Validate { config, out } => validate(config, out, &pool),
        Command::Gallery(g) => gallery_cmd(g, &pool),
        Command::LaneEmden(a) => lane_emden(a, &pool),
    };
    ExitCode::from(code)
}
