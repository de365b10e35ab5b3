//! `lim1`: build and check obstruction certificates, query membership and
//! the telescoping solver, and produce the three-system report.
//!
//! Exit codes: 0 success, 1 a verification or verdict failed, 2 bad input.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lim1_core::annulus::{
    annulus_membership, annulus_rlim_check, fl_split, standard_annulus_corpus, AnnulusCocycle,
    AnnulusSpec, Exhaustion, LaurentTruncatedSeries, DEFAULT_DEGREE_BOUND,
};
use lim1_core::derived::{
    build_system, criterion_failure_witness, default_grid, delta_solve, verify_certificate,
    Cocycle, EtaFamily, GridPoint, InverseSystem, Lim1Verdict, ObstructionCertificate,
    SolveOutcome, SystemConfig, SystemKind, DEFAULT_HORIZON,
};
use lim1_core::membership::{membership as membership_of, sum_non_membership, SpaceSpec};
use lim1_core::report::{run_report, to_markdown, GridSpec, RunConfig};
use lim1_core::series::{DiagonalSeries, Envelope, Sublinear};
use lim1_core::valuation::{parse_rational, RadiusVar};
use lim1_core::{Execution, Mode, Prime, Rational};

#[derive(Parser)]
#[command(
    name = "lim1",
    version,
    about = "Exact lim¹ certificates for dagger and Stein exhaustions"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Global {
    /// Residue characteristic p of the valuation.
    #[arg(long, global = true, default_value_t = 2)]
    prime: u64,
    /// Exponents e_n of the exhausting radii: harmonic, recip:A:B[:S],
    /// square, geometric:B or list:q0,q1,...
    #[arg(long, global = true, default_value = "harmonic")]
    eta_family: String,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Run grid and corpus work on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Markdown,
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemArg {
    Bidisk,
    Disk,
}

#[derive(Subcommand)]
enum Command {
    /// Build obstruction certificates for one parameter point or a grid.
    Counterexample {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long, allow_hyphen_values = true, value_parser = rational)]
        e_lambda: Option<Rational>,
        #[arg(long, allow_hyphen_values = true, value_parser = rational)]
        e_eta: Option<Rational>,
        /// `default`, or a JSON file holding a list of grid points.
        #[arg(long, conflicts_with_all = ["n", "m", "e_lambda", "e_eta"])]
        grid: Option<String>,
    },
    /// Re-check a certificate file (one certificate or a list).
    Verify { path: PathBuf },
    /// Decide membership of Σ a_i x^i y^{d·i} with v(a_i) = env(i).
    Membership {
        #[arg(long, default_value_t = 1)]
        d: u32,
        #[arg(long, allow_hyphen_values = true, value_parser = rational)]
        alpha: Rational,
        #[arg(long, value_enum, default_value_t = SublinearArg::Zero)]
        sublinear: SublinearArg,
        #[arg(long, allow_hyphen_values = true, value_parser = rational, default_value = "0")]
        offset: Rational,
        /// Comma-separated `mode:exponent`, e.g. `dagger:1/2,dagger:0`.
        #[arg(long, allow_hyphen_values = true)]
        space: String,
        /// Also test non-membership in `space + sum_with`.
        #[arg(long, allow_hyphen_values = true)]
        sum_with: Option<String>,
    },
    /// Solve Δ(w) = v for a cocycle file.
    DeltaSolve {
        cocycle: PathBuf,
        #[arg(long, value_enum, default_value_t = SystemArg::Bidisk)]
        system: SystemArg,
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: usize,
    },
    /// Split a Laurent series file into its F and L parts.
    AnnulusSplit {
        series: PathBuf,
        /// With --e-big-r, also decide membership in that annulus.
        #[arg(long, allow_hyphen_values = true, value_parser = rational, requires = "e_big_r")]
        e_r: Option<Rational>,
        #[arg(long = "e-big-r", allow_hyphen_values = true, value_parser = rational, requires = "e_r")]
        e_big_r: Option<Rational>,
    },
    /// Check that the exhausting system of a half-open annulus has vanishing lim¹.
    AnnulusCheck {
        #[arg(long, allow_hyphen_values = true, value_parser = rational, default_value = "1")]
        e_r: Rational,
        #[arg(long = "e-big-r", allow_hyphen_values = true, value_parser = rational, default_value = "0")]
        e_big_r: Rational,
        #[arg(long, default_value_t = DEFAULT_DEGREE_BOUND)]
        degree: u32,
        /// `default`, or `list:q0,q1,...` of inner exponents e_{r,k}.
        #[arg(long, default_value = "default")]
        exhaustion: String,
        /// JSON list of cocycles; defaults to the standard corpus.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Run all three systems and report verdicts.
    Report {
        /// JSON run configuration; command-line --prime and --eta-family
        /// apply when it is absent.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SublinearArg {
    Zero,
    CeilSqrt,
    CeilLog2,
}

impl From<SublinearArg> for Sublinear {
    fn from(s: SublinearArg) -> Self {
        match s {
            SublinearArg::Zero => Sublinear::Zero,
            SublinearArg::CeilSqrt => Sublinear::CeilSqrt,
            SublinearArg::CeilLog2 => Sublinear::CeilLog2,
        }
    }
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// Errors that map to exit code 2.
struct InputError(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.into())
    }
}

type CmdResult = Result<ExitCode, InputError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

struct Ctx {
    prime: Prime,
    eta: EtaFamily,
    out: Option<PathBuf>,
    format: OutputFormat,
    exec: Execution,
}

impl Ctx {
    fn config(&self) -> SystemConfig {
        SystemConfig::new(self.prime, self.eta.clone())
    }

    fn system(&self, kind: SystemKind) -> anyhow::Result<InverseSystem> {
        Ok(build_system(kind, self.config())?)
    }

    fn emit_text(&self, text: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(path) => write_atomic(path, text.as_bytes()),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }

    /// JSON, or for markdown a caller-supplied rendering.
    fn emit<T: Serialize>(
        &self,
        value: &T,
        markdown: impl FnOnce() -> String,
    ) -> anyhow::Result<()> {
        let text = match self.format {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(value)?;
                s.push('\n');
                s
            }
            OutputFormat::Markdown => markdown(),
        };
        self.emit_text(&text)
    }
}

/// Write to a temporary file beside `path`, then rename over it.
fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn json_block<T: Serialize>(value: &T) -> String {
    format!(
        "```json\n{}\n```\n",
        serde_json::to_string_pretty(value).unwrap_or_default()
    )
}

fn run(cli: Cli) -> CmdResult {
    let g = cli.global;
    let ctx = Ctx {
        prime: Prime::new(g.prime)?,
        eta: g.eta_family.parse()?,
        out: g.out,
        format: g.format,
        exec: if g.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
    };
    match cli.cmd {
        Command::Counterexample {
            n,
            m,
            e_lambda,
            e_eta,
            grid,
        } => counterexample(&ctx, n, m, e_lambda, e_eta, grid),
        Command::Verify { path } => verify(&ctx, &path),
        Command::Membership {
            d,
            alpha,
            sublinear,
            offset,
            space,
            sum_with,
        } => membership(
            &ctx,
            d,
            Envelope::new(alpha, sublinear.into(), offset),
            &space,
            sum_with.as_deref(),
        ),
        Command::DeltaSolve {
            cocycle,
            system,
            horizon,
        } => solve(&ctx, &cocycle, system, horizon),
        Command::AnnulusSplit {
            series,
            e_r,
            e_big_r,
        } => annulus_split(&ctx, &series, e_r.zip(e_big_r)),
        Command::AnnulusCheck {
            e_r,
            e_big_r,
            degree,
            exhaustion,
            corpus,
        } => annulus_check(&ctx, e_r, e_big_r, degree, &exhaustion, corpus.as_deref()),
        Command::Report { config } => report(&ctx, config.as_deref()),
    }
}

fn certificates_markdown(certs: &[ObstructionCertificate]) -> String {
    let mut out = String::new();
    for c in certs {
        let i = &c.inputs;
        let _ = writeln!(
            out,
            "## n = {}, m = {}, e_lambda = {}, e_eta = {}\n",
            i.n,
            i.m,
            lim1_core::valuation::format_rational(&i.e_lambda),
            lim1_core::valuation::format_rational(&i.e_eta)
        );
        let _ = writeln!(
            out,
            "| check | lhs | rel | rhs | pass |\n|---|---|---|---|---|"
        );
        for r in &c.checks {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                r.name, r.lhs, r.rel, r.rhs, r.pass
            );
        }
        out.push('\n');
    }
    out
}

fn counterexample(
    ctx: &Ctx,
    n: Option<u32>,
    m: Option<u32>,
    e_lambda: Option<Rational>,
    e_eta: Option<Rational>,
    grid: Option<String>,
) -> CmdResult {
    let sys = ctx.system(SystemKind::BidiskOpenDagger)?;
    let points = match grid.as_deref() {
        Some("default") => default_grid(&sys)?,
        Some(path) => read_json::<Vec<GridPoint>>(Path::new(path))?,
        None => {
            let missing = |what: &str| anyhow!("--{what} is required without --grid");
            vec![GridPoint {
                n: n.ok_or_else(|| missing("n"))?,
                m: m.ok_or_else(|| missing("m"))?,
                e_lambda: e_lambda.ok_or_else(|| missing("e-lambda"))?,
                e_eta: e_eta.ok_or_else(|| missing("e-eta"))?,
            }]
        }
    };
    let mut certs = Vec::with_capacity(points.len());
    for g in &points {
        certs.push(criterion_failure_witness(
            g.n,
            g.m,
            &g.e_lambda,
            &g.e_eta,
            &sys,
        )?);
    }
    let mut failed = false;
    for c in &certs {
        let v = verify_certificate(c, &sys);
        if !v.passed() {
            failed = true;
            eprintln!(
                "self-verification failed for n={} m={}: {:?}",
                c.inputs.n,
                c.inputs.m,
                v.failed()
            );
        }
    }
    if grid.is_some() {
        ctx.emit(&certs, || certificates_markdown(&certs))?;
        eprintln!("{} certificates", certs.len());
    } else {
        ctx.emit(&certs[0], || certificates_markdown(&certs))?;
    }
    Ok(if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn verify(ctx: &Ctx, path: &Path) -> CmdResult {
    let value: serde_json::Value = read_json(path)?;
    let certs: Vec<ObstructionCertificate> = if value.is_array() {
        serde_json::from_value(value).context("parsing certificate list")?
    } else {
        vec![serde_json::from_value(value).context("parsing certificate")?]
    };
    let sys = ctx.system(SystemKind::BidiskOpenDagger)?;
    let mut results = Vec::with_capacity(certs.len());
    let mut ok = true;
    for c in &certs {
        let v = verify_certificate(c, &sys);
        if !v.passed() {
            ok = false;
            for r in v.checks.iter().filter(|r| !r.pass) {
                eprintln!("FAIL {}: {} {} {}", r.name, r.lhs, r.rel, r.rhs);
            }
        }
        results.push(
            serde_json::json!({ "passed": v.passed(), "failed": v.failed(), "checks": v.checks }),
        );
    }
    ctx.emit(&results, || {
        let mut s = String::new();
        for (c, r) in certs.iter().zip(&results) {
            let _ = writeln!(
                s,
                "- n = {}, m = {}: {}",
                c.inputs.n,
                c.inputs.m,
                if r["passed"] == true { "pass" } else { "FAIL" }
            );
        }
        s
    })?;
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn parse_space(s: &str) -> anyhow::Result<SpaceSpec> {
    let vars = s
        .split(',')
        .map(|item| {
            let (mode, e) = item
                .trim()
                .split_once(':')
                .ok_or_else(|| anyhow!("expected mode:exponent, got {item:?}"))?;
            let mode = match mode {
                "closed" => Mode::Closed,
                "dagger" => Mode::Dagger,
                "open" => Mode::Open,
                _ => bail!("unknown mode {mode:?}"),
            };
            Ok(RadiusVar::new(parse_rational(e)?, mode))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(SpaceSpec::new(vars))
}

fn membership(ctx: &Ctx, d: u32, env: Envelope, space: &str, sum_with: Option<&str>) -> CmdResult {
    let space = parse_space(space)?;
    let f = DiagonalSeries::new(d, env);
    let cert = match sum_with {
        Some(other) => sum_non_membership(&f, &space, &parse_space(other)?)?,
        None => membership_of(&f, &space)?,
    };
    ctx.emit(&cert, || json_block(&cert))?;
    Ok(ExitCode::SUCCESS)
}

fn solve(ctx: &Ctx, path: &Path, system: SystemArg, horizon: usize) -> CmdResult {
    let cocycle: Cocycle = read_json(path)?;
    let kind = match system {
        SystemArg::Bidisk => SystemKind::BidiskOpenDagger,
        SystemArg::Disk => SystemKind::OpenDiskStein,
    };
    let sys = ctx.system(kind)?;
    let outcome = match delta_solve(&cocycle, &sys, horizon) {
        Ok(o) => o,
        Err(lim1_core::Error::HorizonExceeded(msg)) => {
            eprintln!("undecided: {msg}");
            return Ok(ExitCode::from(1));
        }
        Err(e) => return Err(e.into()),
    };
    ctx.emit(&outcome, || json_block(&outcome))?;
    Ok(match outcome {
        SolveOutcome::Lift(_) => ExitCode::SUCCESS,
        SolveOutcome::Obstruction(_) => ExitCode::from(1),
    })
}

fn annulus_split(ctx: &Ctx, path: &Path, annulus: Option<(Rational, Rational)>) -> CmdResult {
    let f: LaurentTruncatedSeries = read_json(path)?;
    f.validate(ctx.prime)?;
    let (f_part, l_part) = fl_split(&f);
    let membership = match annulus {
        Some((e_r, e_big_r)) => Some(annulus_membership(&f, &AnnulusSpec::new(e_r, e_big_r)?)?),
        None => None,
    };
    let out = serde_json::json!({ "f_part": f_part, "l_part": l_part, "membership": membership });
    ctx.emit(&out, || json_block(&out))?;
    Ok(ExitCode::SUCCESS)
}

fn parse_exhaustion(s: &str) -> anyhow::Result<Exhaustion> {
    match s {
        "default" => Ok(Exhaustion::Default),
        _ => match s.strip_prefix("list:") {
            Some(items) => Ok(Exhaustion::Explicit(
                items
                    .split(',')
                    .map(parse_rational)
                    .collect::<Result<_, _>>()?,
            )),
            None => bail!("unknown exhaustion {s:?}"),
        },
    }
}

fn annulus_check(
    ctx: &Ctx,
    e_r: Rational,
    e_big_r: Rational,
    degree: u32,
    exhaustion: &str,
    corpus: Option<&Path>,
) -> CmdResult {
    let a = AnnulusSpec::new(e_r, e_big_r)?;
    let exhaustion = parse_exhaustion(exhaustion)?;
    let corpus: Vec<AnnulusCocycle> = match corpus {
        Some(p) => read_json(p)?,
        None => standard_annulus_corpus(degree, ctx.prime),
    };
    let check = annulus_rlim_check(&a, &exhaustion, degree, &corpus, ctx.prime, ctx.exec)?;
    if let Lim1Verdict::Inconclusive { diagnostics } = &check.verdict {
        for d in diagnostics {
            eprintln!("{d}");
        }
    }
    ctx.emit(&check, || json_block(&check))?;
    Ok(match check.verdict {
        Lim1Verdict::VanishesEvidence { .. } => ExitCode::SUCCESS,
        _ => ExitCode::from(1),
    })
}

fn report(ctx: &Ctx, config: Option<&Path>) -> CmdResult {
    let cfg = match config {
        Some(p) => read_json::<RunConfig>(p)?,
        None => RunConfig {
            prime: ctx.prime,
            eta: ctx.eta.clone(),
            grid: GridSpec::Default,
            ..RunConfig::default()
        },
    };
    let r = run_report(&cfg, ctx.exec)?;
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    ctx.emit(&r, || to_markdown(&r))?;
    Ok(if r.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
