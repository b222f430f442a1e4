use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use jplt::audit::{fmt_ratio, posterior_oracle, verify_structural, AuditLimits, SpecializedMds};
use jplt::codec::{self, DemandDoc, PlanDoc};
use jplt::wire::{self, Server};
use jplt::{
    build_query, direct_demand_eval, rate_report, recover, server_answer, Dataset, DemandSpec, Error, Message, Mode,
    PrimeField, Query, QueryKey, Result,
};

#[derive(Parser)]
#[command(name = "jplt", version, about = "Private linear transformation with joint privacy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random dataset of K messages in GF(p)^m.
    GenDataset {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long = "K")]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a demand (W, V) as JSON, random unless --W and --V are given.
    GenDemand {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long = "K")]
        k: usize,
        #[arg(long = "D")]
        d: Option<usize>,
        #[arg(long = "L")]
        l: Option<usize>,
        /// Comma-separated 1-based indices.
        #[arg(long = "W")]
        w: Option<String>,
        /// Rows separated by ';', entries by ','.
        #[arg(long = "V")]
        v: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SchemeMode::Grs)]
        mode: SchemeMode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a query matrix and recovery plan for a demand.
    Query {
        /// Demand JSON.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = SchemeMode::Grs)]
        mode: SchemeMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Query matrix file.
        #[arg(long)]
        out: PathBuf,
        /// Recovery plan JSON.
        #[arg(long)]
        plan: PathBuf,
    },
    /// Apply a dataset to a query file.
    Answer {
        /// Query matrix file.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover the demanded combinations from an answer and a plan.
    Recover {
        /// Answer file.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the whole exchange in process and print the result and rates.
    Run {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long = "K")]
        k: usize,
        #[arg(long = "D")]
        d: Option<usize>,
        #[arg(long = "L")]
        l: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SchemeMode::Grs)]
        mode: SchemeMode,
        /// Demand JSON; random when absent.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Dataset file; random when absent.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Privacy audits.
    Audit {
        #[arg(long, value_enum)]
        mode: AuditMode,
        /// Query matrix file (structural).
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long = "K")]
        k: Option<usize>,
        #[arg(long = "D")]
        d: usize,
        #[arg(long = "L")]
        l: usize,
        /// Accept shortened dimensions above L (necessary condition only).
        #[arg(long)]
        loose: bool,
        /// Scheme to enumerate (posterior).
        #[arg(long, value_enum, default_value_t = SchemeMode::Grs)]
        scheme: SchemeMode,
        #[arg(long)]
        work_limit: Option<u128>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print rates of the scheme against the baselines.
    Bench {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long = "K")]
        k: usize,
        #[arg(long = "D")]
        d: Option<usize>,
        #[arg(long = "L")]
        l: Option<usize>,
    },
    /// Serve a dataset over TCP.
    Serve {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        net: NetArgs,
    },
    /// Send a query file to a server and write the answer.
    Fetch {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[command(flatten)]
        net: NetArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct FieldArgs {
    #[arg(long, default_value_t = 65537)]
    p: u64,
}

#[derive(Args)]
struct NetArgs {
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 7571)]
    port: u16,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeMode {
    Grs,
    Generic,
}

impl From<SchemeMode> for Mode {
    fn from(m: SchemeMode) -> Mode {
        match m {
            SchemeMode::Grs => Mode::Grs,
            SchemeMode::Generic => Mode::Generic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AuditMode {
    Structural,
    Posterior,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: kind={} message={}", e.kind(), e);
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::GenDataset { field, m, k, seed, out } => {
            let data = Dataset::random(PrimeField::new(field.p)?, m, k, &mut rng(seed))?;
            fs::write(out, codec::encode_dataset(&data)?)?;
        }
        Command::GenDemand {
            field,
            k,
            d,
            l,
            w,
            v,
            seed,
            mode,
            out,
        } => {
            let f = PrimeField::new(field.p)?;
            let demand = match (w, v) {
                (Some(w), Some(v)) => explicit_demand(f, k, &w, &v)?,
                (None, None) => random_demand(f, k, d, l, mode.into(), seed)?,
                _ => return Err(Error::ParamInvalid("--W and --V go together".into())),
            };
            write_json(&out, &DemandDoc::from_demand(&demand))?;
        }
        Command::Query {
            input,
            mode,
            seed,
            out,
            plan,
        } => {
            let demand = read_demand(&input)?;
            let mode = mode.into();
            let key = QueryKey::sample(&demand, mode, &mut rng(seed))?;
            let (query, recovery) = build_query(&demand, &key, mode)?;
            fs::write(out, codec::encode_matrix(&query.generator)?)?;
            write_json(&plan, &PlanDoc::from_plan(&recovery))?;
        }
        Command::Answer { input, dataset, out } => {
            let query = Query {
                generator: codec::decode_matrix(&fs::read(input)?)?,
            };
            let data = codec::decode_dataset(&fs::read(dataset)?)?;
            let answer = server_answer(&query, &data)?;
            fs::write(out, codec::encode_answer(data.field(), data.k(), &answer)?)?;
        }
        Command::Recover { input, plan, out } => {
            let (header, answer) = codec::decode_answer(&fs::read(input)?)?;
            let plan = codec::from_json::<PlanDoc>(&fs::read_to_string(plan)?)?.to_plan()?;
            if plan.field != header.field {
                return Err(Error::ParamMismatch(format!(
                    "plan is over GF({}), answer over GF({})",
                    plan.field.modulus(),
                    header.field.modulus()
                )));
            }
            let z = recover(&answer, &plan)?;
            print_messages("Z", &z);
            if let Some(out) = out {
                fs::write(out, codec::encode_recovered(header.field, header.k as usize, &z)?)?;
            }
        }
        Command::Run {
            field,
            m,
            k,
            d,
            l,
            seed,
            mode,
            input,
            dataset,
        } => run(
            field.p,
            m,
            k,
            d,
            l,
            seed,
            mode.into(),
            input.as_deref(),
            dataset.as_deref(),
        )?,
        Command::Audit {
            mode,
            input,
            p,
            k,
            d,
            l,
            loose,
            scheme,
            work_limit,
            out,
        } => {
            let mut limits = AuditLimits::default();
            let report = match mode {
                AuditMode::Structural => {
                    if let Some(w) = work_limit {
                        limits.subsets = w;
                    }
                    let path = input.ok_or_else(|| Error::ParamInvalid("structural audit needs --in".into()))?;
                    let g = codec::decode_matrix(&fs::read(path)?)?;
                    let report = verify_structural(&g, d, l, !loose, &limits)?;
                    println!("subsets: {}", report.records.len());
                    println!("failures: {}", report.failures().count());
                    println!("verdict: {}", if report.pass { "pass" } else { "fail" });
                    serde_json::to_value(&report)?
                }
                AuditMode::Posterior => {
                    if let Some(w) = work_limit {
                        limits.tuples = w;
                    }
                    let (Some(p), Some(k)) = (p, k) else {
                        return Err(Error::ParamInvalid("posterior audit needs --p and --K".into()));
                    };
                    let table = posterior_oracle(k, d, l, p, &SpecializedMds(scheme.into()), &limits)?;
                    println!("realized queries: {}", table.entries.len());
                    println!("skipped demands: {}", table.skipped_demands);
                    println!("max TV distance: {}", fmt_ratio(&table.max_total_variation));
                    println!("verdict: {}", if table.is_private() { "private" } else { "leaks" });
                    table.to_json()
                }
            };
            if let Some(out) = out {
                write_json(&out, &report)?;
            }
        }
        Command::Bench { field, m, k, d, l } => bench(field.p, m, k, d, l)?,
        Command::Serve { input, net } => {
            let data = codec::decode_dataset(&fs::read(input)?)?;
            let server = Server::bind((net.host.as_str(), net.port), data)?;
            eprintln!("listening on {}", server.local_addr()?);
            server.run()?;
        }
        Command::Fetch { input, m, net, out } => {
            let query = Query {
                generator: codec::decode_matrix(&fs::read(input)?)?,
            };
            let answer = wire::fetch((net.host.as_str(), net.port), m, &query)?;
            let g = &query.generator;
            fs::write(out, codec::encode_answer(g.field(), g.cols(), &answer)?)?;
        }
    }
    Ok(())
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, codec::to_json_pretty(value)? + "\n")?;
    Ok(())
}

fn read_demand(path: &Path) -> Result<DemandSpec> {
    codec::from_json::<DemandDoc>(&fs::read_to_string(path)?)?.to_demand()
}

fn parse_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| Error::ParamInvalid(format!("bad number {t:?}: {e}")))
        })
        .collect()
}

fn explicit_demand(field: PrimeField, k: usize, w: &str, v: &str) -> Result<DemandSpec> {
    let doc = DemandDoc {
        p: field.modulus(),
        k,
        support: parse_list(w)?.into_iter().map(|i| i as usize).collect(),
        coefficients: v.split(';').map(parse_list).collect::<Result<_>>()?,
    };
    doc.to_demand()
}

fn shape(k: usize, d: Option<usize>, l: Option<usize>) -> Result<(usize, usize)> {
    match (d, l) {
        (Some(d), Some(l)) => Ok((d, l)),
        _ => Err(Error::ParamInvalid(format!("need --D and --L (K = {k})"))),
    }
}

fn random_demand(
    field: PrimeField,
    k: usize,
    d: Option<usize>,
    l: Option<usize>,
    mode: Mode,
    seed: u64,
) -> Result<DemandSpec> {
    let (d, l) = shape(k, d, l)?;
    let mut r = rng(seed);
    match mode {
        Mode::Grs => DemandSpec::random_grs(field, k, d, l, &mut r),
        Mode::Generic => DemandSpec::random_mds(field, k, d, l, &mut r),
    }
}

fn print_messages(label: &str, msgs: &[Message]) {
    for (i, z) in msgs.iter().enumerate() {
        let coords: Vec<String> = z.coords().iter().map(|c| c.to_string()).collect();
        println!("{label}{} = [{}]", i + 1, coords.join(", "));
    }
}

#[allow(clippy::too_many_arguments)]
fn run(
    p: u64,
    m: usize,
    k: usize,
    d: Option<usize>,
    l: Option<usize>,
    seed: u64,
    mode: Mode,
    demand_path: Option<&Path>,
    dataset_path: Option<&Path>,
) -> Result<()> {
    let field = PrimeField::new(p)?;
    let mut r = rng(seed);
    let demand = match demand_path {
        Some(path) => {
            let demand = read_demand(path)?;
            if demand.field() != field || demand.k() != k {
                return Err(Error::ParamMismatch("demand file disagrees with --p/--K".into()));
            }
            if d.is_some_and(|d| d != demand.d()) || l.is_some_and(|l| l != demand.l()) {
                return Err(Error::ParamMismatch("demand file disagrees with --D/--L".into()));
            }
            demand
        }
        None => {
            let (d, l) = shape(k, d, l)?;
            match mode {
                Mode::Grs => DemandSpec::random_grs(field, k, d, l, &mut r)?,
                Mode::Generic => DemandSpec::random_mds(field, k, d, l, &mut r)?,
            }
        }
    };
    let data = match dataset_path {
        Some(path) => {
            let data = codec::decode_dataset(&fs::read(path)?)?;
            if data.field() != field || data.m() != m || data.k() != k {
                return Err(Error::ParamMismatch("dataset file disagrees with --p/--m/--K".into()));
            }
            data
        }
        None => Dataset::random(field, m, k, &mut r)?,
    };
    let key = QueryKey::sample(&demand, mode, &mut r)?;
    let (query, plan) = build_query(&demand, &key, mode)?;
    let answer = server_answer(&query, &data)?;
    let z = recover(&answer, &plan)?;
    let direct = direct_demand_eval(&data, &demand)?;
    println!("mode: {mode}");
    println!("query: {} x {}", query.generator.rows(), query.generator.cols());
    print_messages("Z", &z);
    println!("matches direct evaluation: {}", z == direct);
    let rates = rate_report(k, demand.d(), demand.l(), p, m)?;
    println!("rate: {}", rates.jplt_rate);
    println!("pir baseline: {}", rates.pir_baseline);
    println!("plc baseline: {}", rates.plc_baseline);
    println!("answer bits: {:.1}", rates.answer_bits);
    if z != direct {
        return Err(Error::AlgebraViolation(
            "recovered values differ from direct evaluation".into(),
        ));
    }
    Ok(())
}

fn bench(p: u64, m: usize, k: usize, d: Option<usize>, l: Option<usize>) -> Result<()> {
    let shapes: Vec<(usize, usize)> = match (d, l) {
        (Some(d), Some(l)) => vec![(d, l)],
        (Some(d), None) => (1..=d).map(|l| (d, l)).collect(),
        _ => (1..=k).flat_map(|d| (1..=d).map(move |l| (d, l))).collect(),
    };
    println!(
        "{:>4} {:>4} {:>4} {:>10} {:>10} {:>10} {:>14}",
        "K", "D", "L", "jplt", "pir", "plc", "answer bits"
    );
    for (d, l) in shapes {
        let r = rate_report(k, d, l, p, m)?;
        println!(
            "{:>4} {:>4} {:>4} {:>10} {:>10} {:>10} {:>14.1}",
            k,
            d,
            l,
            r.jplt_rate.to_string(),
            r.pir_baseline.to_string(),
            r.plc_baseline.to_string(),
            r.answer_bits
        );
    }
    Ok(())
}
