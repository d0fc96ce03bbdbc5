//! Command line front end for the surface generator.
//!
//! Exit codes: 0 success, 2 generation failure, 64 usage error, 65 bad data.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use belyi::covers::{
    build_cover, cover_systole, fixed_point_stats, kernel_probability, parse_generator_word,
    sample_hom, CoverSystole,
};
use belyi::database::{verify, Database, SurfaceRecord};
use belyi::groups::{generated_subgroup_size, FiniteGroup, Sl2, Sym};
use belyi::process::{
    run, search_with_retries, sigma0, sweep, sweep_csv, ProcessConfig, ProcessError,
    ProcessOutcome,
};
use belyi::seeding::stream_rng;
use belyi::surface::Surface;

const EXIT_GENERATION: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;

#[derive(Parser)]
#[command(
    name = "belyi",
    about = "Random cusped hyperbolic surfaces with large systole",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the gluing process once, or search a genus with retries.
    Generate(GenerateArgs),
    /// Produce one verified record per genus in a range, with CSV + database.
    Sweep(SweepArgs),
    /// Re-verify every record of a database.
    Verify(VerifyArgs),
    /// Random regular covers: systole certificates and statistics.
    Covers(CoversArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Plain,
    FixedGenus,
}

#[derive(Args)]
struct GenerateArgs {
    /// Target genus; runs the descending-threshold retry schedule.
    #[arg(long, conflicts_with_all = ["n", "tau0"])]
    genus: Option<usize>,
    /// Number of triangle pairs for a single run (surface has 2n triangles).
    #[arg(long, requires = "tau0")]
    n: Option<usize>,
    /// Trace threshold for a single run.
    #[arg(long, requires = "n")]
    tau0: Option<u64>,
    #[arg(long, value_enum, default_value = "plain")]
    variant: VariantArg,
    /// Refuse to close pure L^k paths until the final gluing.
    #[arg(long)]
    forbid_pure_l: bool,
    /// Master seed; all randomness derives from it.
    #[arg(long)]
    seed: u64,
    /// Attempts per threshold in genus mode.
    #[arg(long, default_value_t = 75)]
    attempts: u64,
    /// Starting threshold in genus mode (default: max(3, genus)).
    #[arg(long)]
    tau_start: Option<u64>,
    /// Parallel attempts in genus mode.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Write the outcome JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Inclusive genus range, e.g. 2..15 (or a single genus).
    #[arg(long, value_parser = parse_range)]
    genus_range: (usize, usize),
    #[arg(long)]
    seed: u64,
    /// CSV output path (genus, tau0, systole, upper_bound).
    #[arg(long)]
    out: PathBuf,
    /// Database JSON path; existing records merge in (larger tau0 wins).
    #[arg(long)]
    db: PathBuf,
    #[arg(long, default_value_t = 75)]
    attempts: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    db: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupArg {
    Sl2,
    Sym,
    Trivial,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatArg {
    /// Exact cover systole certificates per sampled homomorphism.
    Systole,
    /// Mean fixed points of the word image (symmetric groups).
    Fix,
    /// Fraction of homomorphisms that kill the word.
    Kernel,
}

#[derive(Args)]
struct CoversArgs {
    #[arg(long, value_enum)]
    group: GroupArg,
    /// Field prime for sl2.
    #[arg(long)]
    p: Option<u32>,
    /// Symmetric group degrees, e.g. 50,100,200.
    #[arg(long, visible_alias = "n", value_delimiter = ',')]
    degrees: Vec<usize>,
    /// Base surface: a database record (needs --base-db-genus)...
    #[arg(long, requires = "base_db_genus")]
    base_db: Option<PathBuf>,
    /// ...or the built-in 2-triangle cusped torus when omitted.
    #[arg(long)]
    base_db_genus: Option<u32>,
    #[arg(long, value_enum)]
    stat: Option<StatArg>,
    /// Length cap for cover systoles.
    #[arg(long, default_value_t = 12.0)]
    cap: f64,
    #[arg(long, default_value_t = 20)]
    samples: u64,
    #[arg(long)]
    seed: u64,
    /// Generator word, lowercase = generator, uppercase = inverse.
    #[arg(long, default_value = "a")]
    word: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| "bad range start".to_string())?;
        let hi: usize = hi.trim_start_matches('=').trim().parse().map_err(|_| "bad range end".to_string())?;
        if lo > hi {
            return Err("empty range".into());
        }
        Ok((lo, hi))
    } else {
        let g: usize = s.trim().parse().map_err(|_| "bad genus".to_string())?;
        Ok((g, g))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Covers(args) => cmd_covers(args),
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), ExitCode> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| {
            eprintln!("error: cannot write {path:?}: {e}");
            ExitCode::from(EXIT_DATA)
        }),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn outcome_json(outcome: &ProcessOutcome, record: Option<&SurfaceRecord>) -> serde_json::Value {
    json!({
        "n": outcome.n,
        "tau0": outcome.tau0,
        "variant": outcome.variant.to_string(),
        "seed": outcome.seed,
        "t_max": outcome.t_max,
        "saturated": outcome.saturated,
        "safe_at": outcome.safe_at,
        "genus": outcome.genus,
        "cusps": outcome.cusps,
        "systole": outcome.systole,
        "sigma0": sigma0(outcome.tau0),
        "verified": outcome.verified,
        "attempts_used": outcome.attempts_used,
        "record": record.map(|r| json!({
            "genus": r.genus,
            "tau0": r.tau0,
            "gluing": r.gluing,
        })),
    })
}

fn cmd_generate(args: GenerateArgs) -> ExitCode {
    if let Some(genus) = args.genus {
        let result = match search_with_retries(
            genus,
            args.seed,
            args.tau_start,
            args.attempts,
            args.threads.max(1),
        ) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_USAGE);
            }
        };
        return match result.success {
            Some((outcome, record)) => {
                let doc = outcome_json(&outcome, Some(&record));
                if emit(&args.out, &doc.to_string()).is_err() {
                    return ExitCode::from(EXIT_DATA);
                }
                ExitCode::SUCCESS
            }
            None => {
                eprintln!(
                    "generation failed: genus {genus} not reached within {} attempts per threshold",
                    args.attempts
                );
                ExitCode::from(EXIT_GENERATION)
            }
        };
    }
    let (Some(n), Some(tau0)) = (args.n, args.tau0) else {
        eprintln!("error: need either --genus or both --n and --tau0");
        return ExitCode::from(EXIT_USAGE);
    };
    let mut config = match args.variant {
        VariantArg::Plain => ProcessConfig::plain(n, tau0, args.seed),
        VariantArg::FixedGenus => ProcessConfig::fixed_genus(n, tau0, args.seed),
    };
    if args.forbid_pure_l {
        config.forbid_pure_l_closures = true;
    }
    match run(&config) {
        Ok(outcome) => {
            let saturated = outcome.saturated;
            let doc = outcome_json(&outcome, None);
            if emit(&args.out, &doc.to_string()).is_err() {
                return ExitCode::from(EXIT_DATA);
            }
            if saturated {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_GENERATION)
            }
        }
        Err(e @ (ProcessError::SeedTooShort { .. } | ProcessError::BadConfig(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_GENERATION)
        }
    }
}

fn cmd_sweep(args: SweepArgs) -> ExitCode {
    let (lo, hi) = args.genus_range;
    let points = match sweep(lo, hi, args.seed, args.attempts, args.threads.max(1)) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_GENERATION);
        }
    };
    let mut db = if args.db.exists() {
        match Database::load(&args.db) {
            Ok(db) => db,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_DATA);
            }
        }
    } else {
        Database::new()
    };
    for p in &points {
        println!(
            "genus {}: tau0 {} systole {:.6} (<= {:.6}) after {} attempts",
            p.genus,
            p.tau0,
            p.systole,
            p.upper_bound(),
            p.attempts_used
        );
        db.insert(p.record.clone());
    }
    if let Err(e) = db.save_atomic(&args.db) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_DATA);
    }
    if let Err(e) = std::fs::write(&args.out, sweep_csv(&points)) {
        eprintln!("error: cannot write {:?}: {e}", args.out);
        return ExitCode::from(EXIT_DATA);
    }
    ExitCode::SUCCESS
}

fn cmd_verify(args: VerifyArgs) -> ExitCode {
    let db = match Database::load(&args.db) {
        Ok(db) => db,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_DATA);
        }
    };
    let mut all_ok = true;
    for record in db.surfaces.values() {
        let report = verify(record);
        println!("{report}");
        all_ok &= report.passed();
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn load_base(args: &CoversArgs) -> Result<Surface, ExitCode> {
    match (&args.base_db, args.base_db_genus) {
        (Some(path), Some(genus)) => {
            let db = Database::load(path).map_err(|e| {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_DATA)
            })?;
            let record = db.surfaces.get(&genus).ok_or_else(|| {
                eprintln!("error: no genus {genus} record in {path:?}");
                ExitCode::from(EXIT_DATA)
            })?;
            record.decode().map_err(|e| {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_DATA)
            })
        }
        _ => Ok(belyi::covers::test_base_torus()),
    }
}

fn cmd_covers(args: CoversArgs) -> ExitCode {
    let base = match load_base(&args) {
        Ok(b) => b,
        Err(code) => return code,
    };
    let generators = match base.free_generators() {
        Ok(fg) => fg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_DATA);
        }
    };
    let stat = args.stat.unwrap_or(match args.group {
        GroupArg::Sl2 => StatArg::Systole,
        GroupArg::Sym | GroupArg::Trivial => StatArg::Fix,
    });
    match (args.group, stat) {
        (GroupArg::Sl2, StatArg::Systole) => {
            let Some(p) = args.p else {
                eprintln!("error: --group sl2 needs --p");
                return ExitCode::from(EXIT_USAGE);
            };
            let group = match Sl2::new(p) {
                Ok(g) => g,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_USAGE);
                }
            };
            covers_systole(&args, &base, &generators, &group)
        }
        (GroupArg::Trivial, StatArg::Systole) => {
            covers_systole(&args, &base, &generators, &Sym::trivial())
        }
        (GroupArg::Sym, StatArg::Systole) => {
            eprintln!("error: cover systoles need --group sl2 or trivial");
            ExitCode::from(EXIT_USAGE)
        }
        (group_arg, StatArg::Fix) => {
            if !matches!(group_arg, GroupArg::Sym) {
                eprintln!("error: fixed-point statistics need --group sym");
                return ExitCode::from(EXIT_USAGE);
            }
            if args.degrees.is_empty() {
                eprintln!("error: --group sym needs --degrees");
                return ExitCode::from(EXIT_USAGE);
            }
            let word = match parse_generator_word(&args.word, generators.rank) {
                Ok(w) => w,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_USAGE);
                }
            };
            let mut rng = stream_rng(args.seed, &[]);
            let rows =
                match fixed_point_stats(&args.degrees, generators.rank, &word, args.samples, &mut rng)
                {
                    Ok(r) => r,
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(EXIT_USAGE);
                    }
                };
            let mut csv = String::from("group,parameter,word,samples,estimate,stderr\n");
            for row in rows {
                csv.push_str(&format!(
                    "sym,{},{},{},{},{}\n",
                    row.degree, args.word, row.samples, row.mean, row.stderr
                ));
            }
            if emit(&args.out, csv.trim_end()).is_err() {
                return ExitCode::from(EXIT_DATA);
            }
            ExitCode::SUCCESS
        }
        (group_arg, StatArg::Kernel) => {
            let word = match parse_generator_word(&args.word, generators.rank) {
                Ok(w) => w,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_USAGE);
                }
            };
            let mut rng = stream_rng(args.seed, &[]);
            let (name, parameter, est) = match group_arg {
                GroupArg::Sl2 => {
                    let Some(p) = args.p else {
                        eprintln!("error: --group sl2 needs --p");
                        return ExitCode::from(EXIT_USAGE);
                    };
                    let group = match Sl2::new(p) {
                        Ok(g) => g,
                        Err(e) => {
                            eprintln!("error: {e}");
                            return ExitCode::from(EXIT_USAGE);
                        }
                    };
                    let est =
                        kernel_probability(&group, generators.rank, &word, args.samples, &mut rng);
                    ("sl2".to_string(), p.to_string(), est)
                }
                GroupArg::Sym => {
                    let Some(&degree) = args.degrees.first() else {
                        eprintln!("error: --group sym needs --degrees");
                        return ExitCode::from(EXIT_USAGE);
                    };
                    let group = match Sym::new(degree) {
                        Ok(g) => g,
                        Err(e) => {
                            eprintln!("error: {e}");
                            return ExitCode::from(EXIT_USAGE);
                        }
                    };
                    let est =
                        kernel_probability(&group, generators.rank, &word, args.samples, &mut rng);
                    ("sym".to_string(), degree.to_string(), est)
                }
                GroupArg::Trivial => {
                    let group = Sym::trivial();
                    let est =
                        kernel_probability(&group, generators.rank, &word, args.samples, &mut rng);
                    ("trivial".to_string(), "1".to_string(), est)
                }
            };
            let stderr = (est * (1.0 - est) / args.samples as f64).sqrt();
            let csv = format!(
                "group,parameter,word,samples,estimate,stderr\n{},{},{},{},{},{}",
                name, parameter, args.word, args.samples, est, stderr
            );
            if emit(&args.out, &csv).is_err() {
                return ExitCode::from(EXIT_DATA);
            }
            ExitCode::SUCCESS
        }
    }
}

fn covers_systole<G: FiniteGroup>(
    args: &CoversArgs,
    base: &Surface,
    generators: &belyi::surface::FreeGenerators,
    group: &G,
) -> ExitCode {
    let mut results = Vec::new();
    for k in 0..args.samples {
        let mut rng = stream_rng(args.seed, &[k]);
        let hom = sample_hom(group, generators.rank, &mut rng);
        let surjective = group
            .card()
            .filter(|&c| c <= 100_000)
            .map(|c| generated_subgroup_size(group, &hom.images, c as usize + 1) == Some(c as usize));
        let result = match cover_systole(base, generators, group, &hom, args.cap) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_GENERATION);
            }
        };
        let value = match &result {
            CoverSystole::Geodesic(g) => json!({
                "base_word": g.base_word.to_string(),
                "base_trace": g.base_trace,
                "image_order": g.image_order,
                "length": g.length,
                "cover_trace": g.cover_trace.to_string(),
            }),
            CoverSystole::ExceedsCap { cap } => json!({ "exceeds_cap": cap }),
        };
        results.push(json!({
            "sample": k,
            "group": group.name(),
            "surjective": surjective,
            "systole": value,
        }));
        // cross-check against the explicitly built cover when it is small
        if let Ok(cover) = build_cover(base, generators, group, &hom, 1_000) {
            if let (CoverSystole::Geodesic(fast), Ok(cert)) =
                (&result, belyi::geodesics::systole(&cover))
            {
                assert_eq!(
                    fast.cover_trace,
                    belyi::words::Trace::Exact(cert.trace),
                    "cover systole disagrees with the built cover"
                );
            }
        }
    }
    let doc = serde_json::Value::Array(results);
    if emit(&args.out, &doc.to_string()).is_err() {
        return ExitCode::from(EXIT_DATA);
    }
    ExitCode::SUCCESS
}
