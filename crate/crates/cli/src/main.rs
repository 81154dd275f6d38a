use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use ctm_core::analysis::{self, Weighting};
use ctm_core::distribution::build_dataset;
use ctm_core::enumeration::{
    calibrate_cutoff, run_campaign_with_progress, CampaignConfig, Mode, Probe, DEFAULT_BUDGET,
    GENERATOR,
};
use ctm_core::measures::{change_complexity, entropy, entropy2};
use ctm_core::query::{acss, bayes, load_table, local_complexity, LoadedTable, DEFAULT_PRIOR};
use ctm_core::{complete, SpaceSpec};

#[derive(Parser)]
#[command(name = "ctm", version, about = "Coding theorem method toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a machine campaign and write a frequency dataset
    Generate(GenerateArgs),
    /// Probe halting times and suggest a cutoff
    Calibrate(CalibrateArgs),
    /// Look up K and D for strings
    Query(QueryArgs),
    /// Bayes factor and posterior probability of a random source
    Bayes(BayesArgs),
    /// Entropy, second-order entropy and change complexity
    Measures(MeasuresArgs),
    /// Correlation matrix of K from several tables and the classical measures
    Correlate(CorrelateArgs),
    /// Analyses of human response files
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct SpaceArgs {
    #[arg(long)]
    states: u32,
    #[arg(long)]
    symbols: u32,
}

#[derive(Args)]
struct ProbeArgs {
    /// Probe this many sampled machines instead of the whole reduced space
    #[arg(long)]
    probe: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    probe_cutoff: u64,
}

#[derive(Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["full", "sample"])))]
#[command(group(ArgGroup::new("limit").required(true).args(["cutoff", "calibrate"])))]
struct GenerateArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long)]
    full: bool,
    /// Number of machines to draw
    #[arg(long, value_name = "COUNT", requires = "seed")]
    sample: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cutoff: Option<u64>,
    /// Calibrate the cutoff at this quantile of probe halting times
    #[arg(long, value_name = "Q")]
    calibrate: Option<f64>,
    #[command(flatten)]
    probe: ProbeArgs,
    /// Drop patterns seen fewer times than this
    #[arg(long, default_value_t = 1)]
    threshold: u64,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long)]
    workers: Option<usize>,
    /// Also write raw output counts here
    #[arg(long)]
    raw: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[command(flatten)]
    probe: ProbeArgs,
    #[arg(long, default_value_t = ctm_core::enumeration::DEFAULT_QUANTILE)]
    quantile: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    /// Write the halting-time histogram here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    table: PathBuf,
    #[arg(long)]
    alphabet: u32,
}

#[derive(Args)]
struct QueryArgs {
    #[command(flatten)]
    table: TableArgs,
    /// Report K of every window of this many characters
    #[arg(long, value_name = "SPAN")]
    local: Option<usize>,
    #[arg(required = true)]
    strings: Vec<String>,
}

#[derive(Args)]
struct BayesArgs {
    #[command(flatten)]
    table: TableArgs,
    /// Prior probability of a random source
    #[arg(long, default_value_t = DEFAULT_PRIOR)]
    prior: f64,
    #[arg(required = true)]
    strings: Vec<String>,
}

#[derive(Args)]
struct MeasuresArgs {
    #[arg(long)]
    entropy: bool,
    #[arg(long)]
    entropy2: bool,
    #[arg(long)]
    change: bool,
    #[arg(required = true)]
    strings: Vec<String>,
}

#[derive(Args)]
struct CorrelateArgs {
    #[arg(long, num_args = 1.., required = true)]
    table: Vec<PathBuf>,
    /// One string per line
    #[arg(long)]
    strings: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Analysis {
    Exp1,
    Exp2,
    Span,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(value_enum)]
    analysis: Analysis,
    /// Response CSV with header `string,value`
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    table: PathBuf,
    #[arg(long, default_value = "3..11", value_parser = parse_spans)]
    spans: RangeInclusive<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_spans(text: &str) -> Result<RangeInclusive<usize>, String> {
    let (lo, hi) = text
        .split_once("..")
        .ok_or_else(|| format!("expected LO..HI, got {text:?}"))?;
    let lo: usize = lo.trim().parse().map_err(|_| format!("bad span {lo:?}"))?;
    let hi: usize = hi
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|_| format!("bad span {hi:?}"))?;
    if lo > hi {
        return Err(format!("empty span range {text:?}"));
    }
    Ok(lo..=hi)
}

fn workers(requested: Option<usize>) -> usize {
    requested
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn probe_of(args: &ProbeArgs, seed: u64) -> Probe {
    match args.probe {
        Some(size) => Probe::Sample { size, seed },
        None => Probe::Exhaustive,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn generate(args: GenerateArgs) -> Result<()> {
    let space = SpaceSpec::new(args.space.states, args.space.symbols)?;
    let workers = workers(args.workers);
    let seed = args.seed.unwrap_or(0);
    let cutoff = match (args.cutoff, args.calibrate) {
        (Some(c), _) => c,
        (None, Some(q)) => {
            let (c, hist) = calibrate_cutoff(
                space,
                probe_of(&args.probe, seed),
                args.probe.probe_cutoff,
                q,
                workers,
            )?;
            eprintln!(
                "calibrated cutoff {c} from {} halters of {} probed machines",
                hist.halters(),
                hist.probed
            );
            c
        }
        (None, None) => unreachable!("clap requires --cutoff or --calibrate"),
    };
    let mode = match args.sample {
        Some(count) => Mode::Sample { count, seed },
        None => Mode::Full,
    };
    let config = CampaignConfig {
        space,
        mode,
        cutoff,
        budget: args.budget,
    };
    let progress = |done: u64, total: u64| {
        if done == total || done.is_multiple_of(64) {
            eprint!("\rchunks {done}/{total}");
            if done == total {
                eprintln!();
            }
        }
    };
    let raw = run_campaign_with_progress(&config, workers, &progress)?;
    if let Some(path) = &args.raw {
        write_file(path, &raw.to_csv())?;
    }
    let completed = complete(&raw)?;
    let dataset = build_dataset(&completed, args.threshold, GENERATOR)?;
    dataset.write(&args.out)?;
    eprintln!(
        "{} machines run, {} halted, {} patterns written to {}",
        raw.machines_run,
        raw.machines_halted,
        dataset.patterns.len(),
        args.out.display()
    );
    Ok(())
}

fn calibrate(args: CalibrateArgs) -> Result<()> {
    let space = SpaceSpec::new(args.space.states, args.space.symbols)?;
    let (cutoff, hist) = calibrate_cutoff(
        space,
        probe_of(&args.probe, args.seed),
        args.probe.probe_cutoff,
        args.quantile,
        workers(args.workers),
    )?;
    if let Some(path) = &args.out {
        write_file(path, &hist.to_csv())?;
    }
    println!("cutoff,{cutoff}");
    println!("probed,{}", hist.probed);
    println!("halters,{}", hist.halters());
    println!(
        "max_halting_time,{}",
        hist.bins.keys().next_back().copied().unwrap_or(0)
    );
    Ok(())
}

fn open_table(args: &TableArgs) -> Result<LoadedTable> {
    let table = load_table(&args.table)?;
    let found = table.source().alphabet();
    if found != args.alphabet {
        bail!(
            "{} has alphabet {found}, not {}",
            args.table.display(),
            args.alphabet
        );
    }
    Ok(table)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn query(args: QueryArgs) -> Result<()> {
    let table = open_table(&args.table)?;
    let source = table.source();
    let mut out = std::io::stdout().lock();
    match args.local {
        Some(span) => {
            writeln!(out, "string,position,k")?;
            for s in &args.strings {
                for (i, k) in local_complexity(source, s, span)?.into_iter().enumerate() {
                    writeln!(out, "{s},{},{}", i + 1, fmt_opt(k))?;
                }
            }
        }
        None => {
            writeln!(out, "string,k,d")?;
            for r in acss(source, &args.strings)? {
                writeln!(out, "{},{},{}", r.string, fmt_opt(r.k), fmt_opt(r.d))?;
            }
        }
    }
    Ok(())
}

fn bayes_cmd(args: BayesArgs) -> Result<()> {
    let table = open_table(&args.table)?;
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "string,likelihood_random,likelihood_deterministic,bayes_factor,prob_random,complete"
    )?;
    for s in &args.strings {
        match bayes(table.source(), s, Some(args.prior))? {
            Some(b) => writeln!(
                out,
                "{},{},{},{},{},{}",
                b.string,
                b.likelihood_random,
                b.likelihood_deterministic,
                b.bayes_factor,
                fmt_opt(b.posterior_random),
                b.complete
            )?,
            None => writeln!(out, "{s},NA,NA,NA,NA,NA")?,
        }
    }
    Ok(())
}

fn measures_cmd(args: MeasuresArgs) -> Result<()> {
    let all = !(args.entropy || args.entropy2 || args.change);
    let mut header = vec!["string"];
    if all || args.entropy {
        header.push("entropy");
    }
    if all || args.entropy2 {
        header.push("entropy2");
    }
    if all || args.change {
        header.push("change");
    }
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", header.join(","))?;
    for s in &args.strings {
        let mut row = vec![s.clone()];
        if all || args.entropy {
            row.push(entropy(s)?.to_string());
        }
        if all || args.entropy2 {
            row.push(entropy2(s)?.to_string());
        }
        if all || args.change {
            row.push(change_complexity(s)?.to_string());
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

fn correlate_cmd(args: CorrelateArgs) -> Result<()> {
    let tables = args
        .table
        .iter()
        .map(|p| load_table(p))
        .collect::<ctm_core::Result<Vec<_>>>()?;
    let sources: Vec<(String, &dyn ctm_core::ComplexitySource)> = tables
        .iter()
        .map(|t| (format!("K{}", t.source().alphabet()), t.source()))
        .collect();
    let text = fs::read_to_string(&args.strings)
        .with_context(|| format!("reading {}", args.strings.display()))?;
    let strings: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    let (labels, matrix) = analysis::correlate(&strings, &sources)?;
    write_file(&args.out, &analysis::correlation_csv(&labels, &matrix))?;
    let mut out = std::io::stdout().lock();
    writeln!(out, ",{}", labels.join(","))?;
    for (label, row) in labels.iter().zip(&matrix) {
        let cells: Vec<String> = row.iter().map(|r| format!("{r:.4}")).collect();
        writeln!(out, "{label},{}", cells.join(","))?;
    }
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let table = load_table(&args.table)?;
    let source = table.source();
    let records = analysis::read_responses(&args.data)?;
    let mut out = std::io::stdout().lock();
    match args.analysis {
        Analysis::Exp1 => {
            let r = analysis::exp1(&records, source)?;
            write_file(&args.out, &analysis::exp1_csv(&records, &r))?;
            writeln!(out, "weighting,mu0,mean,sd,t,df,p")?;
            for (name, w, mu0) in [
                ("pattern", Weighting::Pattern, r.population.pattern_weighted),
                ("string", Weighting::String, r.population.string_weighted),
            ] {
                let t = r.test(w);
                writeln!(
                    out,
                    "{name},{mu0},{},{},{},{},{}",
                    t.mean, t.sd, t.t, t.df, t.p
                )?;
            }
            if !r.population.complete {
                eprintln!("warning: table lacks some patterns of length {}", r.length);
            }
        }
        Analysis::Exp2 => {
            let r = analysis::exp2(&records, source)?;
            write_file(&args.out, &analysis::exp2_csv(&r))?;
            let f = r.fit;
            writeln!(
                out,
                "slope,intercept,odds_ratio,threshold,se_slope,p_value_slope"
            )?;
            writeln!(
                out,
                "{},{},{},{},{},{}",
                f.slope, f.intercept, f.odds_ratio, f.threshold, f.se_slope, f.p_value_slope
            )?;
        }
        Analysis::Span => {
            let fits = analysis::span_scan(&records, source, args.spans)?;
            write_file(&args.out, &analysis::span_csv(&fits))?;
            writeln!(out, "span,r_squared,slope,intercept")?;
            for f in &fits {
                writeln!(
                    out,
                    "{},{},{},{}",
                    f.span, f.r_squared, f.slope, f.intercept
                )?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Query(a) => query(a),
        Command::Bayes(a) => bayes_cmd(a),
        Command::Measures(a) => measures_cmd(a),
        Command::Correlate(a) => correlate_cmd(a),
        Command::Analyze(a) => analyze(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
