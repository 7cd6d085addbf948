//! Command-line driver: embed | decode | simulate | distances | figure.
//!
//! Every run is a pure function of (channel spec file, flags, seed); all
//! output files carry a header comment with the tool version, the spec
//! hash, and the seed, so any file can be reproduced from scratch.

use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use detgeo::channel::{Channel, ChannelSpec, Observation, Prior};
use detgeo::code_distance::{codebook_table, symbol_distance_table, Estimator};
use detgeo::detect::{decide, decide_repetition, simulate_error_rate, Decision};
use detgeo::embedding::{embed_observation, embed_symbol};
use detgeo::figure::{figure_discrete, figure_locus, FigureSummary};
use detgeo::numfmt::sig9;
use detgeo::sequence::{Codeword, SequenceObservation};
use detgeo::tolerance;

/// Default root seed; bare invocations stay reproducible.
const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Parser)]
#[command(
    name = "detgeo",
    version,
    about = "Euclidean picture of symbol detection: embeddings, MAP decisions, \
             error simulations, code metrics, and plane figures"
)]
struct Cli {
    /// Channel spec file (JSON: type discrete|awgn|laplace).
    #[arg(long, global = true, value_name = "FILE")]
    spec: Option<PathBuf>,

    /// Root seed for every random draw.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED, value_name = "U64")]
    seed: u64,

    /// Directory for generated files.
    #[arg(long, global = true, default_value = ".", value_name = "DIR")]
    out: PathBuf,

    /// Prior override as comma-separated probabilities.
    #[arg(long, global = true, value_name = "P1,P2,...")]
    prior: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the symbol images, and images of given observations, as CSV.
    Embed {
        /// Observation to embed; repeatable.
        #[arg(long = "obs", value_name = "OBS", allow_hyphen_values = true)]
        observations: Vec<String>,
        /// Also read observations from standard input, one per line.
        #[arg(long)]
        stdin: bool,
    },
    /// Decide the transmitted symbol for observations.
    Decode {
        /// Observation to decode; repeatable.
        #[arg(long = "obs", value_name = "OBS", allow_hyphen_values = true)]
        observations: Vec<String>,
        /// Also read observations from standard input, one per line.
        #[arg(long)]
        stdin: bool,
        /// Decode the observations jointly as M repeated uses of the
        /// channel (requires exactly M observations and a uniform prior).
        #[arg(long, value_name = "M")]
        repetition: Option<usize>,
    },
    /// Estimate error rates, decoding every trial with two independent
    /// decoders that must agree.
    Simulate {
        /// Channel uses per trial.
        #[arg(long, default_value_t = 1, value_name = "M")]
        m: usize,
        /// Number of trials.
        #[arg(long, default_value_t = 10_000, value_name = "T")]
        trials: u64,
    },
    /// Symbol distance table, plus codeword distances for a codebook.
    Distances {
        /// exact | mc | quadrature | both (default: exact for discrete
        /// channels, quadrature otherwise).
        #[arg(long, value_enum, value_name = "METHOD")]
        method: Option<MethodArg>,
        /// Monte Carlo sample count.
        #[arg(long, default_value_t = 100_000, value_name = "S")]
        samples: u64,
        /// Quadrature point budget.
        #[arg(long, default_value_t = 512, value_name = "P")]
        points: usize,
        /// Codebook file: one codeword per line, comma-separated 1-based
        /// symbol indices.
        #[arg(long, value_name = "FILE")]
        codebook: Option<PathBuf>,
    },
    /// Plane figure (SVG when the alphabet has three symbols) plus a CSV
    /// companion, with invariant checks.
    Figure {
        /// y grid for the additive families, as lo:hi:count.
        #[arg(long, value_name = "LO:HI:COUNT", allow_hyphen_values = true)]
        grid: Option<String>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exact,
    Mc,
    Quadrature,
    Both,
}

/// Failure classes, one exit code each: 1 usage, 2 spec, 3 erasure,
/// 4 decoder disagreement, 5 estimator, 6 figure invariant.
enum Failure {
    Usage(String),
    Spec(String),
    Erasure(String),
    Disagreement(String),
    Estimator(String),
    Invariant(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Spec(_) => 2,
            Failure::Erasure(_) => 3,
            Failure::Disagreement(_) => 4,
            Failure::Estimator(_) => 5,
            Failure::Invariant(_) => 6,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m)
            | Failure::Spec(m)
            | Failure::Erasure(m)
            | Failure::Disagreement(m)
            | Failure::Estimator(m)
            | Failure::Invariant(m) => m,
        }
    }
}

/// Erasures keep their own exit code no matter where they surface.
fn classify(error: detgeo::Error, default: fn(String) -> Failure) -> Failure {
    if error.is_erasure() {
        Failure::Erasure(error.to_string())
    } else {
        default(error.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}

struct Context {
    channel: Channel,
    prior: Prior,
    seed: u64,
    out: PathBuf,
    spec_hash: String,
}

impl Context {
    fn csv_header(&self) -> String {
        format!(
            "# detgeo {} spec=sha256:{} seed={}",
            env!("CARGO_PKG_VERSION"),
            self.spec_hash,
            self.seed
        )
    }

    fn svg_header(&self) -> String {
        format!(
            "<!-- detgeo {} spec=sha256:{} seed={} -->",
            env!("CARGO_PKG_VERSION"),
            self.spec_hash,
            self.seed
        )
    }

    fn write_file(&self, name: &str, header: &str, body: &str) -> Result<(), Failure> {
        let path = self.out.join(name);
        fs::write(&path, format!("{header}\n{body}"))
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn symbol_name(&self, index: usize) -> String {
        self.channel.alphabet().label(index).to_string()
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let spec_path = cli
        .spec
        .as_deref()
        .ok_or_else(|| Failure::Usage("--spec FILE is required".into()))?;
    let bytes = fs::read(spec_path)
        .map_err(|e| Failure::Spec(format!("cannot read {}: {e}", spec_path.display())))?;
    let spec_hash = hex(&Sha256::digest(&bytes));
    let text = String::from_utf8(bytes)
        .map_err(|_| Failure::Spec(format!("{} is not UTF-8", spec_path.display())))?;
    let ChannelSpec { channel, prior } =
        ChannelSpec::from_json(&text).map_err(|e| classify(e, Failure::Spec))?;
    let violations = channel.validate();
    if !violations.is_empty() {
        let mut msg = format!("{} failed validation:", spec_path.display());
        for v in &violations {
            let _ = write!(msg, "\n  - {v}");
        }
        return Err(Failure::Spec(msg));
    }
    let prior = match &cli.prior {
        Some(raw) => parse_prior(raw, channel.alphabet().size())?,
        None => prior,
    };
    fs::create_dir_all(&cli.out)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", cli.out.display())))?;
    let ctx = Context {
        channel,
        prior,
        seed: cli.seed,
        out: cli.out,
        spec_hash,
    };
    match cli.command {
        Command::Embed {
            observations,
            stdin,
        } => cmd_embed(&ctx, &observations, stdin),
        Command::Decode {
            observations,
            stdin,
            repetition,
        } => cmd_decode(&ctx, &observations, stdin, repetition),
        Command::Simulate { m, trials } => cmd_simulate(&ctx, m, trials),
        Command::Distances {
            method,
            samples,
            points,
            codebook,
        } => cmd_distances(&ctx, method, samples, points, codebook.as_deref()),
        Command::Figure { grid } => cmd_figure(&ctx, grid.as_deref()),
    }
}

fn hex(digest: &[u8]) -> String {
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn parse_prior(raw: &str, n: usize) -> Result<Prior, Failure> {
    let parts: Result<Vec<f64>, _> = raw.split(',').map(|p| p.trim().parse()).collect();
    let parts = parts.map_err(|_| Failure::Spec(format!("cannot parse prior `{raw}`")))?;
    if parts.len() != n {
        return Err(Failure::Spec(format!(
            "prior has {} components, the alphabet has {n}",
            parts.len()
        )));
    }
    Prior::new(parts).map_err(|e| classify(e, Failure::Spec))
}

/// Observations from `--obs` flags, plus stdin lines when requested.
fn collect_observations(
    ctx: &Context,
    flags: &[String],
    stdin: bool,
) -> Result<Vec<Observation>, Failure> {
    let mut raw: Vec<String> = flags.to_vec();
    if stdin {
        let mut buffer = String::new();
        std::io::stdin()
            .read_to_string(&mut buffer)
            .map_err(|e| Failure::Usage(format!("cannot read stdin: {e}")))?;
        raw.extend(
            buffer
                .lines()
                .map(|l| l.trim().to_string())
                .filter(|l| !l.is_empty()),
        );
    }
    raw.iter().map(|r| parse_observation(ctx, r)).collect()
}

fn parse_observation(ctx: &Context, raw: &str) -> Result<Observation, Failure> {
    match ctx.channel {
        Channel::Discrete(_) => Ok(Observation::Label(raw.to_string())),
        Channel::Awgn(_) | Channel::Laplace(_) => raw
            .parse::<f64>()
            .map(Observation::Value)
            .map_err(|_| Failure::Usage(format!("observation `{raw}` is not a number"))),
    }
}

fn coords_row(coords: &[f64]) -> String {
    coords.iter().map(|c| sig9(*c)).collect::<Vec<_>>().join(",")
}

fn cmd_embed(ctx: &Context, flags: &[String], stdin: bool) -> Result<(), Failure> {
    let alphabet = ctx.channel.alphabet();
    let n = alphabet.size();
    let mut body = String::from("index,label");
    for k in 1..=n {
        let _ = write!(body, ",c{k}");
    }
    body.push('\n');
    for i in 0..n {
        let point = embed_symbol(alphabet, i).map_err(|e| classify(e, Failure::Usage))?;
        let _ = writeln!(body, "{},{},{}", i + 1, alphabet.label(i), coords_row(point.coords()));
    }
    ctx.write_file("symbols.csv", &ctx.csv_header(), &body)?;

    let observations = collect_observations(ctx, flags, stdin)?;
    if !observations.is_empty() {
        let mut body = String::from("label");
        for k in 1..=n {
            let _ = write!(body, ",c{k}");
        }
        body.push('\n');
        for obs in &observations {
            let point = ctx
                .channel
                .posterior(&ctx.prior, obs)
                .and_then(|p| embed_observation(&p))
                .map_err(|e| classify(e, Failure::Usage))?;
            let _ = writeln!(body, "{obs},{}", coords_row(point.coords()));
        }
        ctx.write_file("observations.csv", &ctx.csv_header(), &body)?;
    }
    Ok(())
}

fn decision_line(ctx: &Context, decision: &Decision) -> String {
    let mut line = ctx.symbol_name(decision.chosen_index);
    if decision.tie {
        let partners: Vec<String> = decision
            .tied_indices()
            .into_iter()
            .filter(|i| *i != decision.chosen_index)
            .map(|i| ctx.symbol_name(i))
            .collect();
        let _ = write!(line, " (TIE with {})", partners.join(", "));
    }
    let posterior: Vec<String> = decision
        .posterior
        .probabilities()
        .iter()
        .map(|p| sig9(*p))
        .collect();
    let _ = write!(
        line,
        " posterior=[{}] margin={} tie={}",
        posterior.join(", "),
        sig9(decision.margin),
        decision.tie
    );
    line
}

fn cmd_decode(
    ctx: &Context,
    flags: &[String],
    stdin: bool,
    repetition: Option<usize>,
) -> Result<(), Failure> {
    let observations = collect_observations(ctx, flags, stdin)?;
    if observations.is_empty() {
        return Err(Failure::Usage(
            "no observations given; pass --obs or --stdin".into(),
        ));
    }
    match repetition {
        Some(m) => {
            if observations.len() != m {
                return Err(Failure::Usage(format!(
                    "--repetition {m} needs exactly {m} observations, got {}",
                    observations.len()
                )));
            }
            if !ctx.prior.is_uniform() {
                return Err(Failure::Usage(
                    "repetition decoding assumes a uniform prior".into(),
                ));
            }
            let sequence = SequenceObservation::new(observations)
                .map_err(|e| classify(e, Failure::Usage))?;
            let decision = decide_repetition(&ctx.channel, &sequence)
                .map_err(|e| classify(e, Failure::Usage))?;
            println!("repetition M={m}: {}", decision_line(ctx, &decision));
        }
        None => {
            for obs in &observations {
                let decision = decide(&ctx.channel, &ctx.prior, obs)
                    .map_err(|e| classify(e, Failure::Usage))?;
                println!("{obs}: {}", decision_line(ctx, &decision));
            }
        }
    }
    Ok(())
}

fn cmd_simulate(ctx: &Context, m: usize, trials: u64) -> Result<(), Failure> {
    let report = simulate_error_rate(&ctx.channel, &ctx.prior, m, trials, ctx.seed)
        .map_err(|e| classify(e, Failure::Usage))?;
    let noise = ctx
        .channel
        .noise_parameter()
        .map(sig9)
        .unwrap_or_default();
    let mut body =
        String::from("channel,sigma2_or_lambda,M,trials,symbol_index,errors,erasures,agreement\n");
    for (i, tally) in report.per_symbol.iter().enumerate() {
        let _ = writeln!(
            body,
            "{},{},{},{},{},{},{},{}",
            ctx.channel.kind_name(),
            noise,
            m,
            tally.trials,
            i + 1,
            tally.errors,
            tally.erasures,
            tally.agreement
        );
    }
    ctx.write_file("simulate.csv", &ctx.csv_header(), &body)?;
    println!(
        "agreement {}/{}",
        report.agreement,
        report.trials - report.erasures
    );
    println!("average error rate {}", sig9(report.error_rate()));
    if report.erasures > 0 {
        println!("erasures {}", report.erasures);
    }
    if report.disagreements() > 0 {
        return Err(Failure::Disagreement(format!(
            "the geometric and direct decoders disagreed on {} of {} trials",
            report.disagreements(),
            report.trials
        )));
    }
    Ok(())
}

fn parse_codebook(path: &Path, alphabet_size: usize) -> Result<Vec<Codeword>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut codebook = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let indices: Result<Vec<usize>, _> =
            line.split(',').map(|f| f.trim().parse::<usize>()).collect();
        let indices = indices.map_err(|_| {
            Failure::Usage(format!("codebook line {}: cannot parse `{line}`", lineno + 1))
        })?;
        if indices.contains(&0) {
            return Err(Failure::Usage(format!(
                "codebook line {}: symbol indices are 1-based",
                lineno + 1
            )));
        }
        let word = Codeword::new(indices.iter().map(|i| i - 1).collect(), alphabet_size)
            .map_err(|e| Failure::Usage(format!("codebook line {}: {e}", lineno + 1)))?;
        codebook.push(word);
    }
    Ok(codebook)
}

fn estimator_columns(est: &Estimator, std_error: Option<f64>) -> String {
    match est {
        Estimator::Exact => ",exact,,,".to_string(),
        Estimator::MonteCarlo { samples, seed } => format!(
            ",monte_carlo,{samples},{seed},{}",
            std_error.map(sig9).unwrap_or_default()
        ),
        Estimator::Quadrature { points } => format!(",quadrature,{points},,"),
    }
}

fn cmd_distances(
    ctx: &Context,
    method: Option<MethodArg>,
    samples: u64,
    points: usize,
    codebook: Option<&Path>,
) -> Result<(), Failure> {
    let discrete = matches!(ctx.channel, Channel::Discrete(_));
    let method = method.unwrap_or(if discrete {
        MethodArg::Exact
    } else {
        MethodArg::Quadrature
    });
    let estimators: Vec<Estimator> = match (method, discrete) {
        (MethodArg::Exact, _) => vec![Estimator::Exact],
        (MethodArg::Mc, _) => vec![Estimator::MonteCarlo {
            samples,
            seed: ctx.seed,
        }],
        (MethodArg::Quadrature, _) => vec![Estimator::Quadrature { points }],
        (MethodArg::Both, true) => vec![
            Estimator::Exact,
            Estimator::MonteCarlo {
                samples,
                seed: ctx.seed,
            },
        ],
        (MethodArg::Both, false) => vec![
            Estimator::Quadrature { points },
            Estimator::MonteCarlo {
                samples,
                seed: ctx.seed,
            },
        ],
    };

    let n = ctx.channel.alphabet().size();
    let mut body = String::from("i,j,label_i,label_j,ds,method,samples_or_points,seed,stderr\n");
    for estimator in &estimators {
        let table = symbol_distance_table(&ctx.channel, &ctx.prior, estimator)
            .map_err(|e| classify(e, Failure::Estimator))?;
        for i in 0..n {
            for j in 0..n {
                let se = table.std_errors.as_ref().map(|s| s[i * n + j]);
                let _ = writeln!(
                    body,
                    "{},{},{},{},{}{}",
                    i + 1,
                    j + 1,
                    ctx.symbol_name(i),
                    ctx.symbol_name(j),
                    sig9(table.get(i, j)),
                    estimator_columns(estimator, se)
                );
            }
        }
    }
    ctx.write_file("ds.csv", &ctx.csv_header(), &body)?;

    if let Some(path) = codebook {
        let words = parse_codebook(path, n)?;
        let render = |word: &Codeword| {
            word.indices()
                .iter()
                .map(|i| (i + 1).to_string())
                .collect::<Vec<_>>()
                .join("-")
        };
        let mut body =
            String::from("row,col,c1,c2,dv,min_pair,method,samples_or_points,seed,stderr\n");
        for estimator in &estimators {
            let table = codebook_table(&ctx.channel, &ctx.prior, &words, estimator)
                .map_err(|e| classify(e, Failure::Estimator))?;
            for row in 0..table.size {
                for col in 0..table.size {
                    let se = table.std_errors.as_ref().map(|s| s[row * table.size + col]);
                    let _ = writeln!(
                        body,
                        "{},{},{},{},{},{}{}",
                        row + 1,
                        col + 1,
                        render(&words[row]),
                        render(&words[col]),
                        sig9(table.get(row, col)),
                        table.min_pair == (row, col),
                        estimator_columns(estimator, se)
                    );
                }
            }
            println!(
                "{}: closest pair {} -> {} (dv {})",
                estimator.method_name(),
                render(&words[table.min_pair.0]),
                render(&words[table.min_pair.1]),
                sig9(table.get(table.min_pair.0, table.min_pair.1))
            );
        }
        ctx.write_file("dv.csv", &ctx.csv_header(), &body)?;
    }
    Ok(())
}

fn parse_grid(raw: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = raw.split(':').collect();
    if parts.len() != 3 {
        return Err(Failure::Usage(format!(
            "grid `{raw}` must look like lo:hi:count"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| Failure::Usage(format!("bad grid bound `{}`", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| Failure::Usage(format!("bad grid bound `{}`", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| Failure::Usage(format!("bad grid count `{}`", parts[2])))?;
    if count == 0 || hi < lo {
        return Err(Failure::Usage(format!("degenerate grid `{raw}`")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..count)
        .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
        .collect())
}

fn cmd_figure(ctx: &Context, grid: Option<&str>) -> Result<(), Failure> {
    let n = ctx.channel.alphabet().size();
    let (stem, document) = match &ctx.channel {
        Channel::Discrete(c) => (
            "figure1",
            figure_discrete(c, &ctx.prior).map_err(|e| classify(e, Failure::Usage))?,
        ),
        Channel::Awgn(_) => {
            let grid = parse_grid(grid.unwrap_or("-3:3:121"))?;
            (
                "figure2",
                figure_locus(&ctx.channel, &ctx.prior, &grid)
                    .map_err(|e| classify(e, Failure::Usage))?,
            )
        }
        Channel::Laplace(_) => {
            let grid = parse_grid(grid.unwrap_or("-5:5:201"))?;
            (
                "figure3",
                figure_locus(&ctx.channel, &ctx.prior, &grid)
                    .map_err(|e| classify(e, Failure::Usage))?,
            )
        }
    };
    ctx.write_file(&format!("{stem}.csv"), &ctx.csv_header(), &document.csv)?;
    if let Some(svg) = &document.svg {
        ctx.write_file(&format!("{stem}.svg"), &ctx.svg_header(), svg)?;
    } else {
        println!("svg skipped: the plane is only drawable for three symbols");
    }

    match &document.summary {
        FigureSummary::Discrete {
            triangle_side,
            tie_residual,
            tie_labels,
        } => {
            let expected = 2.0_f64.sqrt() / (2.0 * n as f64);
            println!(
                "triangle side: {} (expected {})",
                sig9(*triangle_side),
                sig9(expected)
            );
            println!(
                "tie observations: {} (max bisector residual {:.2e})",
                if tie_labels.is_empty() {
                    "none".to_string()
                } else {
                    tie_labels.join(", ")
                },
                tie_residual
            );
            if (triangle_side - expected).abs() > tolerance::PROJECTION_ABS {
                return Err(Failure::Invariant(format!(
                    "symbol images are not equidistant: side {} vs {}",
                    sig9(*triangle_side),
                    sig9(expected)
                )));
            }
            if *tie_residual > tolerance::PROJECTION_ABS {
                return Err(Failure::Invariant(format!(
                    "a tied observation sits off its bisector by {}",
                    sig9(*tie_residual)
                )));
            }
        }
        FigureSummary::AwgnLocus {
            collinearity_residual,
        } => {
            println!("collinearity residual: {:e}", collinearity_residual);
            if *collinearity_residual >= tolerance::COLLINEAR_REL {
                return Err(Failure::Invariant(format!(
                    "locus is not a line: residual {collinearity_residual:e}"
                )));
            }
        }
        FigureSummary::LaplaceLocus {
            pieces,
            saturation_points,
        } => {
            println!("pieces: {pieces}, saturation points: {saturation_points}");
            // N - 1 linear segments between consecutive symbol values,
            // plus one saturated point past each end.
            if *pieces != n + 1 || *saturation_points != 2 {
                return Err(Failure::Invariant(format!(
                    "expected {} pieces with 2 saturation points, found {pieces} and \
                     {saturation_points}",
                    n + 1
                )));
            }
        }
    }
    Ok(())
}
