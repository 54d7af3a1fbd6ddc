use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anticonc::convexcover::{bad_configuration_search, convex_cover};
use anticonc::harness::{bundled_scenario, evaluate, extremal_search, parse_scenario, run_campaign, Check, Scenario};
use anticonc::sensitivity::{minimal_boosting_n, BoostingReport, SensitivityReport, SignCube};
use anticonc::sumstruct::relative_bound_check;
use anticonc::{
    full_distribution, hit_probability, partition_anti_concentrated, rho, Budget, CoefficientSystem,
    DyadicProbability, Point, TargetSet,
};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "anticonc", version, about = "Exact anti-concentration for Rademacher sums")]
struct Cli {
    /// Scenario file; supplies the target and system when they are not given directly.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Caps n for full laws and sign sweeps.
    #[arg(long, global = true)]
    max_n: Option<usize>,
    /// Writes the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Structured)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Structured,
    Plain,
}

#[derive(clap::Args)]
struct Inputs {
    /// Coefficient system as JSON or a path to a JSON file: {"d": .., "coefficients": [..]}.
    #[arg(long)]
    system: Option<String>,
    /// Target set as JSON or a path to a JSON file, tagged by "kind".
    #[arg(long)]
    target: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact law of X.
    Dist(Inputs),
    /// Point concentration of X.
    Rho(Inputs),
    /// Pr(X in S).
    Hit(Inputs),
    /// Anti-concentrated partition with the given dyadic levels.
    Partition {
        #[command(flatten)]
        inputs: Inputs,
        /// Comma-separated levels such as 1/4,1/4.
        #[arg(long, value_delimiter = ',')]
        levels: Vec<String>,
    },
    /// Weighted KST inequalities on the two-half sum graph.
    Kst {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 2)]
        t: usize,
    },
    /// Hypergraph bound with m blocks.
    Hyper {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 2)]
        m: u32,
    },
    /// Cover of a point set in convex position by 2d parts.
    Cover {
        /// JSON list of points or a path to one.
        #[arg(long)]
        points: String,
    },
    /// Influences, average sensitivity and the boosting inequality.
    Sensitivity {
        #[command(flatten)]
        inputs: Inputs,
        /// Uses the smallest escaping N when omitted.
        #[arg(long)]
        n_low: Option<usize>,
    },
    /// Hill-climbs integer systems to maximise Pr(X in S).
    Search {
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 4)]
        bound: i64,
        #[arg(long, default_value_t = 1000)]
        evaluations: u64,
    },
    /// Runs a verification campaign.
    Campaign {
        /// Name of a bundled scenario, used when --scenario is absent.
        #[arg(long)]
        bundled: Option<String>,
    },
}

struct Output {
    value: Value,
    plain: String,
    violation: bool,
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
        Ok(out) => {
            let text = match cli.format {
                Format::Structured => {
                    serde_json::to_string_pretty(&out.value).expect("json output") + "\n"
                }
                Format::Plain => out.plain,
            };
            if let Err(e) = write_output(&cli, &text) {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
            if out.violation {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn write_output(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_json_arg(arg: &str) -> Result<String> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        Ok(arg.to_string())
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(arg: &str, what: &str) -> Result<T> {
    let text = read_json_arg(arg)?;
    serde_json::from_str(&text).map_err(|e| anyhow!("{what} {}:{}: {e}", e.line(), e.column()))
}

fn load_scenario(cli: &Cli) -> Result<Option<Scenario>> {
    let Some(path) = &cli.scenario else {
        return Ok(None);
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut s = parse_scenario(&text, &path.display().to_string())?;
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    Ok(Some(s))
}

fn budget(cli: &Cli, scenario: Option<&Scenario>) -> Budget {
    let b = scenario.map(|s| s.budget).unwrap_or_default();
    match cli.max_n {
        Some(cap) => b.with_max_n(cap),
        None => b,
    }
}

fn system(cli: &Cli, inputs: &Inputs) -> Result<CoefficientSystem> {
    if let Some(arg) = &inputs.system {
        return parse_json(arg, "system");
    }
    match load_scenario(cli)? {
        Some(s) if s.instance_count() > 0 => Ok(s.system(0)?),
        _ => bail!("no coefficient system: pass --system or a scenario with instances"),
    }
}

fn target(cli: &Cli, arg: Option<&String>) -> Result<TargetSet> {
    if let Some(arg) = arg {
        return parse_json(arg, "target");
    }
    load_scenario(cli)?
        .and_then(|s| s.target)
        .ok_or_else(|| anyhow!("no target: pass --target or a scenario with a target"))
}

fn run(cli: &Cli) -> Result<Output> {
    let scenario = load_scenario(cli)?;
    let b = budget(cli, scenario.as_ref());
    match &cli.command {
        Command::Dist(inputs) => {
            let dist = full_distribution(&system(cli, inputs)?, &b)?;
            let plain = dist
                .iter()
                .map(|(x, p)| format!("{x}\t{p}\n"))
                .collect();
            Ok(ok(json!(dist), plain))
        }
        Command::Rho(inputs) => {
            let (r, at) = rho(&full_distribution(&system(cli, inputs)?, &b)?);
            let plain = format!("rho = {r} at {at}\n");
            Ok(ok(json!({ "rho": r, "at": at }), plain))
        }
        Command::Hit(inputs) => {
            let s = target(cli, inputs.target.as_ref())?;
            let p = hit_probability(&full_distribution(&system(cli, inputs)?, &b)?, &s)?;
            Ok(ok(json!({ "probability": p }), format!("Pr(X in S) = {p}\n")))
        }
        Command::Partition { inputs, levels } => {
            let lambdas = levels
                .iter()
                .map(|l| {
                    let q = l.parse().map_err(|e| anyhow!("level {l}: {e}"))?;
                    Ok(DyadicProbability::from_rational(&q)?)
                })
                .collect::<Result<Vec<_>>>()?;
            let p = partition_anti_concentrated(&system(cli, inputs)?, &lambdas, &b)?;
            let plain = format!("{:?}\n", p.blocks());
            Ok(ok(json!(p), plain))
        }
        Command::Kst { inputs, t } => {
            let s = target(cli, inputs.target.as_ref())?;
            let o = evaluate(&Check::Kst { t: *t }, &system(cli, inputs)?, Some(&s), &b)?;
            let plain = format!("{:?}\n{}\n", o.status, o.details);
            let violation = o.status == anticonc::harness::Status::Fail;
            Ok(Output {
                value: json!(o),
                plain,
                violation,
            })
        }
        Command::Hyper { inputs, m } => {
            let s = target(cli, inputs.target.as_ref())?;
            let r = relative_bound_check(&system(cli, inputs)?, &s, *m, &b)?;
            let plain = format!(
                "w(H) = {}  Pr = {}  lambda = {}  C = {}  all ok: {}\n",
                r.hypergraph_weight,
                r.probability,
                r.lambda,
                r.constant,
                r.all_ok()
            );
            Ok(Output {
                violation: !r.all_ok(),
                value: json!(r),
                plain,
            })
        }
        Command::Cover { points } => {
            let points: Vec<Point> = parse_json(points, "points")?;
            let cover = convex_cover(&points)?;
            let d = cover.dim;
            let mut free = true;
            for part in &cover.parts {
                free &= bad_configuration_search(&part.points, d, &b)?.is_none();
            }
            let mut plain = String::new();
            for part in &cover.parts {
                plain += &format!("axis {} {}: {} points\n", part.axis, part.side_symbol(), part.points.len());
            }
            plain += &format!("parts free of bad configurations: {free}\n");
            Ok(Output {
                value: json!({ "cover": cover, "parts_free": free }),
                plain,
                violation: !free,
            })
        }
        Command::Sensitivity { inputs, n_low } => {
            let s = target(cli, inputs.target.as_ref())?;
            let cube = SignCube::sweep(&system(cli, inputs)?, &s, &b)?;
            let report = SensitivityReport::from_cube(&cube);
            let minimal = minimal_boosting_n(&cube);
            let boost = match n_low.or(minimal) {
                Some(k) => Some(BoostingReport::from_cube(&cube, k)?),
                None => None,
            };
            let mut plain = String::new();
            for (i, p) in report.influences.iter().enumerate() {
                plain += &format!("Inf_{i} = {p}\n");
            }
            plain += &format!("AS = {}\nPr = {}\n", report.average_sensitivity, report.probability);
            match &boost {
                Some(r) => {
                    plain += &format!(
                        "N = {}: {} <= {} is {}, precondition {}\n",
                        r.n_low, r.lhs, r.rhs, r.ok, r.precondition_ok
                    )
                }
                None => plain += "no N admits a flip escape\n",
            }
            let violation = boost.as_ref().is_some_and(BoostingReport::is_violation);
            Ok(Output {
                value: json!({ "sensitivity": report, "minimal_n": minimal, "boosting": boost }),
                plain,
                violation,
            })
        }
        Command::Search {
            target: t,
            n,
            d,
            bound,
            evaluations,
        } => {
            let s = target(cli, t.as_ref())?;
            let seed = cli.seed.or(scenario.as_ref().map(|s| s.seed)).unwrap_or(0);
            let r = extremal_search(&s, *n, *d, *bound, *evaluations, seed, &b)?;
            let plain = format!(
                "best Pr = {} (initial {}) after {} evaluations\n{:?}\n",
                r.probability, r.initial_probability, r.evaluations, r.system
            );
            Ok(ok(json!(r), plain))
        }
        Command::Campaign { bundled } => {
            let mut s = match (scenario, bundled) {
                (Some(s), _) => s,
                (None, Some(name)) => bundled_scenario(name)?,
                (None, None) => bail!("campaign needs --scenario or --bundled"),
            };
            if let Some(seed) = cli.seed {
                s.seed = seed;
            }
            let start = Instant::now();
            let report = run_campaign(&s, cli.workers)?;
            eprintln!(
                "campaign {} finished in {:.2?} with {} workers",
                s.id,
                start.elapsed(),
                cli.workers
            );
            let violation = !report.violations.is_empty();
            let plain = report.to_plain();
            let value = serde_json::to_value(&report)?;
            Ok(Output {
                value,
                plain,
                violation,
            })
        }
    }
}

fn ok(value: Value, plain: String) -> Output {
    Output {
        value,
        plain,
        violation: false,
    }
}

trait SideSymbol {
    fn side_symbol(&self) -> &'static str;
}

impl SideSymbol for anticonc::convexcover::CoverPart {
    fn side_symbol(&self) -> &'static str {
        match self.side {
            anticonc::convexcover::Side::Plus => "+",
            anticonc::convexcover::Side::Minus => "-",
        }
    }
}
