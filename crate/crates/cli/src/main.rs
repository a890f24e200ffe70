//! Command-line front end: compress/decompress files, tune the error
//! bound, partition, run queries, and produce benchmark tables.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lci_core::bench::{run_decode_bench, BenchReport, DecodeMode};
use lci_core::codec::{compress, decompress, space_report};
use lci_core::error::{Error, Result};
use lci_core::format::{
    self, ingest_corpus_u32, ingest_keys, serialize, serialize_segments_only, write_keys,
    InputFormat, LciFile,
};
use lci_core::partition::{greedy_partition, optimal_partition, PartitionPlan};
use lci_core::query::{self, QueryStats};
use lci_core::tuner;
use lci_core::{CompressedList, SortedKeyList};

#[derive(Parser)]
#[command(
    name = "lci",
    about = "Learned compression for sorted integer lists",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    U32,
    U64,
}

impl FormatArg {
    fn resolve(arg: Option<FormatArg>, path: &Path) -> InputFormat {
        match arg {
            Some(FormatArg::Text) => InputFormat::TextLines,
            Some(FormatArg::U32) => InputFormat::BinaryU32,
            Some(FormatArg::U64) => InputFormat::BinaryU64,
            None => InputFormat::from_path(path),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Scalar,
    Blocked,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compress raw keys into an LCI file.
    Compress {
        input: PathBuf,
        output: PathBuf,
        /// Fixed error bound.
        #[arg(long, conflicts_with_all = ["tune", "sweep"])]
        epsilon: Option<u32>,
        /// Pick the bound from the closed-form gap-statistics formula.
        #[arg(long, conflicts_with = "sweep")]
        tune: bool,
        /// Pick the bound by measuring a power-of-two sweep.
        #[arg(long)]
        sweep: bool,
        /// Input layout (defaults from the file extension: .txt text,
        /// .u64 binary u64, otherwise binary u32).
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Write the segments-only form (approximate queries, no residuals).
        #[arg(long)]
        segments_only: bool,
    },
    /// Decode an LCI file back to raw keys.
    Decompress {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Measure decompression throughput (bits/int, ns/int, GiB/s).
    Bench {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "blocked")]
        mode: ModeArg,
        /// Timed passes; the median is reported.
        #[arg(long, default_value_t = 5)]
        repeat: u32,
        /// Input is a count-prefixed multi-list corpus.
        #[arg(long)]
        corpus: bool,
        /// Decode independent lists on a worker pool (LC_THREADS workers).
        #[arg(long)]
        lists_parallel: bool,
        #[arg(long, conflicts_with = "tune")]
        epsilon: Option<u32>,
        /// Tune the bound per list instead of using --epsilon (default 64).
        #[arg(long)]
        tune: bool,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Emit one machine-readable line instead of the table.
        #[arg(long)]
        machine: bool,
        /// Externally measured row for side-by-side comparison, as
        /// NAME=BITS_PER_INT,NS_PER_INT,GIB_S. Repeatable.
        #[arg(long, value_name = "NAME=BITS,NS,GIBS")]
        baseline: Vec<String>,
    },
    /// Query compressed files directly.
    Query {
        #[command(subcommand)]
        q: QueryCmd,
    },
    /// Split a key list into partitions with per-partition error bounds.
    Partition {
        input: PathBuf,
        /// Exact quadratic solver (small lists).
        #[arg(long, conflicts_with = "greedy")]
        exact: bool,
        /// Geometric-jump approximation with local cut refinement.
        #[arg(long)]
        greedy: bool,
        #[arg(long, default_value_t = 64)]
        granularity: usize,
        /// Write the materialized plan to this path.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Report gap statistics and the chosen error bound.
    Tune {
        input: PathBuf,
        /// Also print the measured power-of-two sweep.
        #[arg(long)]
        sweep: bool,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
}

#[derive(Subcommand)]
enum QueryCmd {
    /// Keys present in both lists (AND).
    Intersect {
        a: PathBuf,
        b: PathBuf,
        /// Write binary/text output here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        out_format: Option<FormatArg>,
    },
    /// Keys present in either list (OR).
    Union {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        out_format: Option<FormatArg>,
    },
    /// k-th q-quantile of the stored keys.
    Quantile {
        file: PathBuf,
        k: u64,
        q: u64,
        /// Segments-only estimate (within epsilon of exact).
        #[arg(long)]
        approx: bool,
    },
    /// Smallest stored key >= x.
    Nextgeq { file: PathBuf, x: u64 },
}

fn read_lci(path: &Path) -> Result<CompressedList> {
    format::deserialize(&std::fs::read(path)?)
}

fn read_lci_any(path: &Path) -> Result<LciFile> {
    format::read_list(&std::fs::read(path)?)
}

fn print_report(c: &CompressedList, file_bytes: usize) {
    let r = space_report(c);
    println!("keys:        {} ({}-bit)", c.n, c.key_width.bits());
    println!(
        "epsilon:     {} ({} residual bits/key)",
        c.epsilon,
        c.residuals.bit_width()
    );
    println!("segments:    {}", c.segments.len());
    println!("bits/int:    {:.3}", r.bits_per_int);
    println!("ratio:       {:.4}", r.ratio);
    println!("file bytes:  {file_bytes}");
}

fn choose_epsilon(keys: &SortedKeyList, fixed: Option<u32>, tune: bool, sweep: bool) -> Result<u32> {
    if let Some(e) = fixed {
        return Ok(e);
    }
    if tune {
        match tuner::auto_epsilon(keys) {
            Ok((eps, stats)) => {
                println!(
                    "tuned epsilon {eps} (gap variance {:.3}, C {:.4})",
                    stats.gap_variance,
                    stats.c_const.unwrap_or(f64::NAN)
                );
                return Ok(eps);
            }
            Err(Error::DegenerateSample) | Err(Error::TooShort { .. }) => {
                eprintln!("warning: sample too regular to calibrate; using epsilon 1");
                return Ok(1);
            }
            Err(e) => return Err(e),
        }
    }
    if sweep {
        let table = tuner::sweep(keys, &tuner::default_sweep())?;
        let (eps, bits) = table
            .iter()
            .copied()
            .min_by_key(|&(_, b)| b)
            .ok_or(Error::EpsilonInfeasible { epsilon: 1 })?;
        println!("sweep chose epsilon {eps} ({bits} bits)");
        return Ok(eps);
    }
    Err(Error::ParseError(
        "choose one of --epsilon, --tune or --sweep".into(),
    ))
}

fn cmd_compress(
    input: &Path,
    output: &Path,
    epsilon: Option<u32>,
    tune: bool,
    sweep: bool,
    format: Option<FormatArg>,
    segments_only: bool,
) -> Result<()> {
    let keys = ingest_keys(input, FormatArg::resolve(format, input))?;
    let eps = choose_epsilon(&keys, epsilon, tune, sweep)?;
    let c = compress(&keys, eps)?;
    let bytes = if segments_only {
        serialize_segments_only(&c)?
    } else {
        serialize(&c)?
    };
    std::fs::write(output, &bytes)?;
    print_report(&c, bytes.len());
    Ok(())
}

fn cmd_decompress(input: &Path, output: &Path, format: Option<FormatArg>) -> Result<()> {
    let c = read_lci(input)?;
    let keys = decompress(&c)?;
    write_keys(output, &keys, FormatArg::resolve(format, output))?;
    println!("decoded {} keys", keys.len());
    Ok(())
}

fn parse_baseline(spec: &str) -> Result<(String, f64, f64, f64)> {
    let bad = || Error::ParseError(format!("bad --baseline {spec:?}, want NAME=BITS,NS,GIBS"));
    let (name, nums) = spec.split_once('=').ok_or_else(bad)?;
    let mut it = nums.split(',').map(|v| v.trim().parse::<f64>());
    match (it.next(), it.next(), it.next(), it.next()) {
        (Some(Ok(bits)), Some(Ok(ns)), Some(Ok(gibs)), None) => {
            Ok((name.to_string(), bits, ns, gibs))
        }
        _ => Err(bad()),
    }
}

fn bench_threads(parallel: bool) -> usize {
    if !parallel {
        return 1;
    }
    std::env::var("LC_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        })
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    input: &Path,
    mode: ModeArg,
    repeat: u32,
    corpus: bool,
    parallel: bool,
    epsilon: Option<u32>,
    tune: bool,
    format: Option<FormatArg>,
    machine: bool,
    baselines: &[String],
) -> Result<()> {
    let raw_lists = if corpus {
        ingest_corpus_u32(input)?
    } else {
        vec![ingest_keys(input, FormatArg::resolve(format, input))?]
    };
    if raw_lists.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut lists = Vec::with_capacity(raw_lists.len());
    for keys in &raw_lists {
        let eps = if tune {
            tuner::auto_epsilon(keys).map(|(e, _)| e).unwrap_or(1)
        } else {
            epsilon.unwrap_or(64)
        };
        lists.push(compress(keys, eps)?);
    }
    let mode = match mode {
        ModeArg::Scalar => DecodeMode::Scalar,
        ModeArg::Blocked => DecodeMode::Blocked,
    };
    let name = input
        .file_name()
        .map_or_else(|| "input".to_string(), |s| s.to_string_lossy().into_owned());
    let report = run_decode_bench(&name, &lists, mode, repeat, bench_threads(parallel));
    if machine {
        println!("{}", report.machine_row());
    } else {
        println!("{}", BenchReport::table_header());
        println!("{}", report.table_row());
        for spec in baselines {
            let (name, bits, ns, gibs) = parse_baseline(spec)?;
            println!(
                "{:<16} {:>8} {:>14.3} {:>12.3} {:>12.3} {:>12}",
                name, "ext", bits, ns, gibs, "-"
            );
        }
    }
    Ok(())
}

fn emit_keys(keys: &SortedKeyList, out: Option<&Path>, format: Option<FormatArg>) -> Result<()> {
    match out {
        Some(path) => {
            write_keys(path, keys, FormatArg::resolve(format, path))?;
            println!("{} keys -> {}", keys.len(), path.display());
        }
        None => {
            let mut text = String::new();
            for k in keys.keys() {
                text.push_str(&k.to_string());
                text.push('\n');
            }
            print!("{text}");
        }
    }
    Ok(())
}

fn cmd_query(q: QueryCmd) -> Result<()> {
    match q {
        QueryCmd::Intersect { a, b, out, out_format } => {
            let (ca, cb) = (read_lci(&a)?, read_lci(&b)?);
            let mut stats = QueryStats::default();
            let r = query::intersect_with_stats(&ca, &cb, &mut stats)?;
            emit_keys(&r, out.as_deref(), out_format)?;
            eprintln!(
                "segments skipped {} visited {} residual words read {}",
                stats.segments_skipped, stats.segments_visited, stats.residual_words_read
            );
        }
        QueryCmd::Union { a, b, out, out_format } => {
            let (ca, cb) = (read_lci(&a)?, read_lci(&b)?);
            let r = query::union(&ca, &cb)?;
            emit_keys(&r, out.as_deref(), out_format)?;
        }
        QueryCmd::Quantile { file, k, q, approx } => match read_lci_any(&file)? {
            LciFile::Full(c) => {
                if approx {
                    println!("{}", query::quantile_approx(c.model(), k, q)?);
                } else {
                    println!("{}", query::quantile_exact(&c, k, q)?);
                }
            }
            LciFile::SegmentsOnly(s) => {
                if !approx {
                    return Err(Error::CorruptPayload(
                        "segments-only file supports only --approx quantiles",
                    ));
                }
                let m = query::ModelView {
                    segments: &s.segments,
                    epsilon: s.epsilon,
                    n: s.n,
                };
                println!("{}", query::quantile_approx(m, k, q)?);
            }
        },
        QueryCmd::Nextgeq { file, x } => {
            let c = read_lci(&file)?;
            match query::next_geq(&c, x) {
                Some((idx, key)) => println!("{idx} {key}"),
                None => println!("NOT_FOUND"),
            }
        }
    }
    Ok(())
}

fn cmd_partition(
    input: &Path,
    exact: bool,
    greedy: bool,
    granularity: usize,
    out: Option<&Path>,
    format: Option<FormatArg>,
) -> Result<()> {
    let keys = ingest_keys(input, FormatArg::resolve(format, input))?;
    let plan: PartitionPlan = if exact || !greedy {
        if keys.len() > 4000 {
            eprintln!(
                "warning: exact solver is quadratic; {} keys will be slow (try --greedy)",
                keys.len()
            );
        }
        optimal_partition(&keys)?
    } else {
        greedy_partition(&keys, granularity)?
    };
    let single = lci_core::partition::edge_cost(&keys, 0, keys.len())?
        + lci_core::partition::PLAN_HEADER_BITS;
    println!("partitions:  {}", plan.part_count());
    println!("cuts:        {:?}", plan.cuts);
    println!("epsilons:    {:?}", plan.per_part_epsilon);
    println!("total bits:  {} (single-partition {})", plan.total_bits, single);
    println!(
        "bits/int:    {:.3}",
        plan.total_bits as f64 / keys.len().max(1) as f64
    );
    if let Some(path) = out {
        let parts = lci_core::partition::compress_partitions(&keys, &plan)?;
        std::fs::write(path, format::serialize_plan(&parts)?)?;
        println!("plan -> {}", path.display());
    }
    Ok(())
}

fn cmd_tune(input: &Path, do_sweep: bool, format: Option<FormatArg>) -> Result<()> {
    let keys = ingest_keys(input, FormatArg::resolve(format, input))?;
    let stats = tuner::gap_stats(&keys)?;
    println!("keys:         {}", keys.len());
    println!("gap variance: {:.4}", stats.gap_variance);
    match tuner::calibrate_c(&keys, &tuner::default_sweep()) {
        Ok(c) => {
            let mut stats = stats;
            stats.c_const = Some(c);
            let eps = tuner::epsilon_opt(&stats)?;
            println!("C:            {c:.4}");
            println!("epsilon_opt:  {eps}");
            println!(
                "model bits:   {:.0} (N*(1.721+ceil(log2 eps)))",
                tuner::space_model(&stats, eps)
            );
        }
        Err(Error::DegenerateSample) => {
            println!("C:            n/a (degenerate sample: segment count never varies)");
            println!("epsilon_opt:  1 (data is piecewise-exactly linear)");
        }
        Err(e) => return Err(e),
    }
    if do_sweep {
        println!("sweep (epsilon -> total bits):");
        let table = tuner::sweep(&keys, &tuner::default_sweep())?;
        let best = table.iter().map(|&(_, b)| b).min().unwrap_or(0);
        for (eps, bits) in table {
            let mark = if bits == best { "  <- min" } else { "" };
            println!("  {eps:>5} {bits:>14}{mark}");
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Compress {
            input,
            output,
            epsilon,
            tune,
            sweep,
            format,
            segments_only,
        } => cmd_compress(&input, &output, epsilon, tune, sweep, format, segments_only),
        Cmd::Decompress { input, output, format } => cmd_decompress(&input, &output, format),
        Cmd::Bench {
            input,
            mode,
            repeat,
            corpus,
            lists_parallel,
            epsilon,
            tune,
            format,
            machine,
            baseline,
        } => cmd_bench(
            &input, mode, repeat, corpus, lists_parallel, epsilon, tune, format, machine,
            &baseline,
        ),
        Cmd::Query { q } => cmd_query(q),
        Cmd::Partition {
            input,
            exact,
            greedy,
            granularity,
            out,
            format,
        } => cmd_partition(&input, exact, greedy, granularity, out.as_deref(), format),
        Cmd::Tune { input, sweep, format } => cmd_tune(&input, sweep, format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
