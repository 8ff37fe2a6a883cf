use std::fs;
use std::fmt::Write as _;
use std::io::{BufReader, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rus_synth::database::{self, build_z_table, Complex64, Database, DEFAULT_MAX_ENTRIES, SCHEMA_VERSION, U2};
use rus_synth::decompose::{self, Mode};
use rus_synth::gates::Circuit;
use rus_synth::rus::{self, chebyshev_interval};
use rus_synth::search::{self, GenericParams, SearchTemplate, TwoCzParams};
use rus_synth::verifier;

const DB_ENV: &str = "RUS_DB";

#[derive(Parser)]
#[command(name = "rus", version, about = "Search, store and apply repeat-until-success circuits")]
struct Cli {
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    human: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate a template and write the accepted circuits as a database.
    Search(SearchArgs),
    #[command(subcommand)]
    Db(DbCmd),
    #[command(subcommand)]
    Decompose(DecomposeCmd),
    /// Re-check every searched entry with the statevector oracle.
    Verify(VerifyArgs),
    #[command(subcommand)]
    Cost(CostCmd),
    /// Analyze a single circuit file.
    Analyze {
        file: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TemplateArg {
    TwoCz,
    Generic,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, value_enum)]
    template: TemplateArg,
    #[arg(long)]
    t_budget: usize,
    /// Generic template only.
    #[arg(long, default_value_t = 1)]
    ancillas: usize,
    /// Generic template only.
    #[arg(long, default_value_t = 10)]
    max_len: usize,
    /// Generic template only: add CNOT to the alphabet.
    #[arg(long)]
    cnot: bool,
    #[arg(long, default_value_t = 1)]
    shards: usize,
    /// Run just this shard; otherwise all shards run and are merged.
    #[arg(long)]
    shard_index: Option<usize>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: PathBuf,
    /// Allow budgets above the desk default.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct DbPath {
    /// Database file; defaults to $RUS_DB.
    #[arg(long)]
    db: Option<PathBuf>,
}

impl DbPath {
    fn resolve(&self) -> Result<PathBuf> {
        match &self.db {
            Some(p) => Ok(p.clone()),
            None => std::env::var_os(DB_ENV)
                .map(PathBuf::from)
                .ok_or_else(|| anyhow!("no database given; pass --db or set {DB_ENV}")),
        }
    }

    fn load(&self) -> Result<Database> {
        load_db(&self.resolve()?)
    }
}

#[derive(Subcommand)]
enum DbCmd {
    /// Compose entries into class-k products up to a T-count cap.
    Expand {
        #[command(flatten)]
        db: DbPath,
        #[arg(long)]
        t_cap: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ENTRIES)]
        max_entries: usize,
        #[arg(long)]
        out: PathBuf,
    },
    Stats {
        #[command(flatten)]
        db: DbPath,
    },
    /// Write the Z-rotation table.
    ExportZ {
        #[command(flatten)]
        db: DbPath,
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge databases, re-analyzing and keeping the cheapest entry per class.
    Dedupe {
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DecomposeCmd {
    Z {
        #[command(flatten)]
        db: DbPath,
        #[arg(long, allow_hyphen_values = true)]
        angle: f64,
        #[arg(long)]
        eps: f64,
    },
    U {
        #[command(flatten)]
        db: DbPath,
        /// JSON file holding four [re, im] pairs in row-major order.
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value = "auto")]
        mode: Mode,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    db: DbPath,
    /// Also check amplitude amplification where a plan exists.
    #[arg(long)]
    amplify: bool,
    #[arg(long, default_value_t = 16)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Subcommand)]
enum CostCmd {
    Bgs {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = decompose::V3_EXPECTED_T)]
        t_per_v3: f64,
    },
    VRatio {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        tp: f64,
    },
    Wk {
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        eps: f64,
    },
    Chebyshev {
        #[arg(long)]
        variance: f64,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
    },
}

fn load_db(path: &Path) -> Result<Database> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(Database::read(BufReader::new(f))?)
}

fn save_db(db: &Database, path: &Path) -> Result<()> {
    fs::write(path, db.to_string()).with_context(|| format!("writing {}", path.display()))
}

fn emit(human: bool, mut v: Value) {
    if let Value::Object(m) = &mut v {
        m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    }
    let mut out = String::new();
    if human {
        render_human(&mut out, &v, 0);
    } else {
        out = format!("{v}\n");
    }
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
}

fn render_human(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match x {
                    Value::Object(_) | Value::Array(_) if !is_flat(x) => {
                        let _ = writeln!(out, "{pad}{k}:");
                        render_human(out, x, indent + 1);
                    }
                    _ => {
                        let _ = writeln!(out, "{pad}{k}: {}", scalar(x));
                    }
                }
            }
        }
        Value::Array(a) => {
            for x in a {
                if is_flat(x) {
                    let _ = writeln!(out, "{pad}- {}", scalar(x));
                } else {
                    let _ = writeln!(out, "{pad}-");
                    render_human(out, x, indent + 1);
                }
            }
        }
        x => {
            let _ = writeln!(out, "{pad}{}", scalar(x));
        }
    }
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Object(m) => m.is_empty(),
        Value::Array(a) => a.iter().all(|x| !x.is_object() && !x.is_array()) && a.len() <= 8,
        _ => true,
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        x => x.to_string(),
    }
}

fn template_of(a: &SearchArgs) -> SearchTemplate {
    match a.template {
        TemplateArg::TwoCz => SearchTemplate::TwoCzCanonical(TwoCzParams::new(a.t_budget)),
        TemplateArg::Generic => {
            let mut p = GenericParams::new(a.ancillas, a.t_budget, a.max_len);
            p.cnot = a.cnot;
            SearchTemplate::GenericGateWords(p)
        }
    }
}

fn run_search(a: &SearchArgs) -> Result<Value> {
    if a.t_budget > search::DEFAULT_MAX_T_BUDGET && !a.force {
        bail!("t-budget {} exceeds the desk default {}; pass --force", a.t_budget, search::DEFAULT_MAX_T_BUDGET);
    }
    if a.shards == 0 {
        bail!("--shards must be at least 1");
    }
    let template = template_of(a);
    let shards = search::shard_space(&template, a.shards);
    let found = match a.shard_index {
        Some(i) => {
            let s = shards.get(i).ok_or_else(|| anyhow!("shard index {i} out of range 0..{}", a.shards))?;
            search::run_search_jobs(&template, s, a.jobs)
        }
        None => search::merge(shards.iter().map(|s| search::run_search_jobs(&template, s, a.jobs))),
    };
    let mut db = Database::from_found(&found);
    db.header.template = Some(serde_json::to_value(&template)?);
    save_db(&db, &a.out)?;
    Ok(json!({
        "template": template.name(),
        "t_budget": a.t_budget,
        "shards": a.shards,
        "shard_index": a.shard_index,
        "classes": db.base_len(),
        "out": a.out.display().to_string(),
    }))
}

fn run_db(c: &DbCmd) -> Result<Value> {
    match c {
        DbCmd::Expand { db, t_cap, max_entries, out } => {
            let mut d = db.load()?;
            let r = d.expand_classk(*t_cap, *max_entries);
            save_db(&d, out)?;
            Ok(json!({
                "t_cap": t_cap,
                "base": d.base_len(),
                "composites": r.added,
                "max_class_k": r.levels,
                "truncated": r.truncated,
                "out": out.display().to_string(),
            }))
        }
        DbCmd::Stats { db } => {
            let d = db.load()?;
            let z = build_z_table(&d);
            let mut v = serde_json::to_value(d.stats())?;
            v["z_table_len"] = json!(z.len());
            v["z_mean_nearest_gap"] = json!(z.mean_nearest_gap());
            v["z_max_gap"] = json!(z.max_gap());
            Ok(v)
        }
        DbCmd::ExportZ { db, csv, out } => {
            let d = db.load()?;
            let z = build_z_table(&d);
            let body = if *csv { z.to_csv() } else { format!("{}\n", serde_json::to_string(&z)?) };
            match out {
                Some(p) => {
                    fs::write(p, body)?;
                    Ok(json!({ "entries": z.len(), "out": p.display().to_string() }))
                }
                None => {
                    print!("{body}");
                    Ok(Value::Null)
                }
            }
        }
        DbCmd::Dedupe { out, inputs } => {
            let mut merged = Database::new();
            for p in inputs {
                let d = load_db(p)?;
                if merged.header.template.is_none() {
                    merged.header.template = d.header.template.clone();
                }
                merged.merge_base(&d.dedupe()?);
            }
            save_db(&merged, out)?;
            Ok(json!({ "inputs": inputs.len(), "classes": merged.base_len(), "out": out.display().to_string() }))
        }
    }
}

fn read_matrix(p: &Path) -> Result<U2> {
    let v: Value = serde_json::from_str(&fs::read_to_string(p)?)?;
    let flat: Vec<Value> = match v {
        Value::Array(rows) if rows.len() == 2 && rows.iter().all(|r| r.as_array().is_some_and(|x| x.len() == 2 && x[0].is_array())) => {
            rows.into_iter().flat_map(|r| r.as_array().cloned().unwrap_or_default()).collect()
        }
        Value::Array(a) if a.len() == 4 => a,
        _ => bail!("matrix must be four [re, im] pairs"),
    };
    let mut u = [Complex64::new(0.0, 0.0); 4];
    for (i, x) in flat.iter().enumerate() {
        let [re, im]: [f64; 2] = serde_json::from_value(x.clone()).context("matrix entry must be [re, im]")?;
        u[i] = Complex64::new(re, im);
    }
    Ok(u)
}

fn run_decompose(c: &DecomposeCmd) -> Result<Value> {
    match c {
        DecomposeCmd::Z { db, angle, eps } => {
            let d = db.load()?;
            let z = build_z_table(&d);
            let r = decompose::decompose_z(&z, *angle, *eps)?;
            Ok(serde_json::to_value(r)?)
        }
        DecomposeCmd::U { db, matrix, eps, mode } => {
            let d = db.load()?;
            let z = build_z_table(&d);
            let u = read_matrix(matrix)?;
            let r = decompose::decompose_u(&d, &z, &u, *eps, *mode)?;
            Ok(serde_json::to_value(r)?)
        }
    }
}

fn run_verify(a: &VerifyArgs) -> Result<(Value, bool)> {
    let d = a.db.load()?;
    let mut reports = Vec::new();
    let mut all = true;
    for (i, e) in d.base().enumerate() {
        let Some(c) = &e.circuit else { continue };
        let analysis = match rus::analyze(c) {
            Ok(Some(x)) => x,
            _ => {
                all = false;
                reports.push(json!({ "index": i, "circuit": c.to_text(), "pass": false, "error": "not a RUS circuit" }));
                continue;
            }
        };
        let r = verifier::verify_rus(c, &analysis, a.trials, a.seed);
        let mut pass = r.pass;
        let mut entry = json!({
            "index": i,
            "circuit": c.to_text(),
            "p": analysis.p_f64(),
            "pass": r.pass,
            "failed_outcomes": r.failed,
        });
        if a.amplify {
            if let Ok(Some(plan)) = analysis.amplification_plan() {
                let ar = verifier::verify_amplification(c, &analysis, plan.j, a.trials, a.seed);
                pass &= ar.pass;
                entry["amplification"] = serde_json::to_value(&ar)?;
            }
        }
        entry["pass"] = json!(pass);
        all &= pass;
        reports.push(entry);
    }
    let passed = reports.iter().filter(|r| r["pass"] == json!(true)).count();
    Ok((json!({ "entries": reports, "passed": passed, "failed": reports.len() - passed }), all))
}

fn run_cost(c: &CostCmd) -> Result<Value> {
    Ok(match c {
        CostCmd::Bgs { eps, t_per_v3 } => json!({ "cost": decompose::cost_bgs(*eps, *t_per_v3) }),
        CostCmd::VRatio { p, tp } => json!({ "ratio": decompose::cost_v_ratio(*p, *tp) }),
        CostCmd::Wk { theta, eps } => {
            json!({ "cost": decompose::cost_wk(*theta, *eps), "gamma": decompose::wk_gamma(*theta) })
        }
        CostCmd::Chebyshev { variance, confidence } => {
            if !(*confidence > 0.0 && *confidence < 1.0) {
                bail!("confidence must lie in (0, 1)");
            }
            json!({ "half_width": chebyshev_interval(*variance, *confidence) })
        }
    })
}

fn run_analyze(file: &Path) -> Result<Value> {
    let c = Circuit::from_file_str(&fs::read_to_string(file)?)?;
    let a = rus::analyze(&c)?.ok_or_else(|| anyhow!("not a RUS circuit with Clifford recoveries"))?;
    let mut v = serde_json::to_value(a.to_record())?;
    v["circuit"] = json!(c.to_text());
    v["axial_angle"] = json!(database::classify_axial(&a.u_beta));
    v["amplification"] = serde_json::to_value(a.amplification_plan().ok().flatten())?;
    Ok(v)
}

fn run(cli: &Cli) -> Result<bool> {
    let (v, ok) = match &cli.cmd {
        Cmd::Search(a) => (run_search(a)?, true),
        Cmd::Db(c) => (run_db(c)?, true),
        Cmd::Decompose(c) => (run_decompose(c)?, true),
        Cmd::Verify(a) => run_verify(a)?,
        Cmd::Cost(c) => (run_cost(c)?, true),
        Cmd::Analyze { file } => (run_analyze(file)?, true),
    };
    if !v.is_null() {
        emit(cli.human, v);
    }
    Ok(ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let msg = format!("{e:#}");
            if cli.human {
                eprintln!("error: {msg}");
            } else {
                eprintln!("{}", json!({ "schema_version": SCHEMA_VERSION, "error": msg }));
            }
            ExitCode::from(1)
        }
    }
}
