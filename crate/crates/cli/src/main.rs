//! `gwlocal`: command-line front end to the core library.

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gwlocal_core::coeffring::{parse_q, q_str};
use gwlocal_core::genfun::{f_dg, Route};
use gwlocal_core::hypertail::{consistency_report, hypertail, HypertailCaps, Locus};
use gwlocal_core::loc0::{
    descendant_invariant_pn, nonequivariant_exponent, pipeline_p2_example, pipeline_quintic_degree1, pipeline_quintic_degree2, TorusWeights, TwistSpec,
};
use gwlocal_core::verify::{run_suite, DEFAULT_SEED};
use gwlocal_core::Error;
use serde_json::{json, Value};

/// Environment variable naming the default cap profile.
const CAP_PROFILE_ENV: &str = "GWLOCAL_CAP_PROFILE";

#[derive(Parser, Debug)]
#[command(name = "gwlocal", version, about = "Exact series, hypertails and genus-0 localization")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone)]
struct RunConfig {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Seed for the randomized parts of `verify`.
    #[arg(long, default_value_t = DEFAULT_SEED, global = true)]
    seed: u64,
    /// Torus weights, comma separated rationals (N+1 of them).
    #[arg(long, global = true)]
    weights: Option<String>,
    /// Truncation caps, e.g. "ql=1,qg=5,z=6"; unset keys come from the profile.
    #[arg(long, global = true)]
    caps: Option<String>,
    /// Cap profile: small or desk.
    #[arg(long, env = CAP_PROFILE_ENV, default_value = "desk", global = true)]
    profile: String,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// F_{d,g} as a z-series.
    Fdg(FdgArgs),
    /// S-sum and F_{d,g} generating functions.
    Genfun {
        #[command(subcommand)]
        cmd: GenfunCmd,
    },
    /// Hypertail coefficients at a fixed locus.
    Hypertail(HypertailArgs),
    /// Genus-0 localization on projective space.
    Loc0 {
        #[command(subcommand)]
        cmd: Loc0Cmd,
    },
    /// Run the acceptance checklist.
    Verify {
        /// all, fast, loc0, appendix, hypertail, cy3 or series
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

#[derive(Subcommand, Debug)]
enum GenfunCmd {
    Fdg(FdgArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum RouteArg {
    R1,
    R2,
    R3,
    All,
}

#[derive(Args, Debug)]
struct FdgArgs {
    #[arg(long)]
    d: u32,
    #[arg(long)]
    g: u32,
    /// Largest z power; defaults to the profile's z cap.
    #[arg(long)]
    order: Option<u32>,
    #[arg(long, value_enum, default_value_t = RouteArg::R3)]
    route: RouteArg,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum LocusArg {
    Q0,
    X0,
}

#[derive(Args, Debug)]
struct HypertailArgs {
    #[arg(long, value_enum, default_value_t = LocusArg::Q0)]
    locus: LocusArg,
    /// Print the closed-form consistency report instead of coefficients.
    #[arg(long)]
    consistency: bool,
}

#[derive(Subcommand, Debug)]
enum Loc0Cmd {
    /// One descendant invariant on P^N.
    Invariant {
        #[arg(long = "N")]
        n_dim: usize,
        #[arg(long)]
        d: u32,
        /// e.g. "O(-5)-", "O(0)+", or "O(5)" for no lambda
        #[arg(long)]
        twist: Option<String>,
        /// comma separated "psi^a H^b" classes
        #[arg(long, default_value = "")]
        ins: String,
    },
    /// A worked pipeline.
    Pipeline {
        #[arg(value_enum)]
        name: PipelineArg,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum PipelineArg {
    P2,
    Quintic1,
    Quintic2,
}

/// What went wrong, mapped onto the exit code.
enum Failure {
    Usage(String),
    Guard(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceGuard(_) => Failure::Guard(e.to_string()),
            Error::Precondition(_) | Error::Parse(_) => Failure::Usage(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn profile_caps(name: &str) -> Result<BTreeMap<&'static str, u32>, Failure> {
    let (ql, qg, z) = match name {
        "small" => (1, 3, 4),
        "desk" => (1, 5, 6),
        other => return Err(Failure::Usage(format!("unknown cap profile {other:?}; expected small or desk"))),
    };
    Ok(BTreeMap::from([("ql", ql), ("qg", qg), ("z", z)]))
}

fn resolve_caps(cfg: &RunConfig) -> Result<BTreeMap<&'static str, u32>, Failure> {
    let mut caps = profile_caps(&cfg.profile)?;
    if let Some(spec) = &cfg.caps {
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| Failure::Usage(format!("cap {part:?} is not key=value")))?;
            let key = match k.trim() {
                "ql" => "ql",
                "qg" => "qg",
                "z" => "z",
                other => return Err(Failure::Usage(format!("unknown cap {other:?}; expected ql, qg or z"))),
            };
            let n: u32 = v.trim().parse().map_err(|_| Failure::Usage(format!("cap {part:?} needs a nonnegative integer")))?;
            caps.insert(key, n);
        }
    }
    Ok(caps)
}

fn resolve_weights(cfg: &RunConfig, n_dim: usize) -> Result<TorusWeights, Failure> {
    let Some(spec) = &cfg.weights else {
        return Ok(TorusWeights::standard(n_dim));
    };
    let ws = spec.split(',').map(parse_q).collect::<gwlocal_core::Result<Vec<_>>>()?;
    if ws.len() != n_dim + 1 {
        return Err(Failure::Usage(format!("P^{n_dim} needs {} weights, got {}", n_dim + 1, ws.len())));
    }
    Ok(TorusWeights::new(ws)?)
}

/// "psi^2 H", "H^3", "psi", "1" → (ψ power, H power).
fn parse_insertion(s: &str) -> Result<(u32, u32), Failure> {
    let mut out = (0u32, 0u32);
    let bad = || Failure::Usage(format!("cannot read insertion {s:?}; use e.g. \"psi^2 H\""));
    for tok in s.split(|c: char| c.is_whitespace() || c == '*').filter(|t| !t.is_empty()) {
        let (base, exp) = match tok.split_once('^') {
            Some((b, e)) => (b, e.parse::<u32>().map_err(|_| bad())?),
            None => (tok, 1),
        };
        match base {
            "psi" => out.0 += exp,
            "H" => out.1 += exp,
            "1" if exp == 1 => {}
            _ => return Err(bad()),
        }
    }
    Ok(out)
}

/// Writes to stdout; a closed pipe is not an error worth a panic.
fn out(s: &str) {
    use std::io::Write;
    let mut h = std::io::stdout().lock();
    let _ = h.write_all(s.as_bytes()).and_then(|_| h.flush());
}

fn csv_line(fields: &[String]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(fields).expect("writing to memory");
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf8 input")
}

/// Flat string map as JSON or as key,value rows.
fn emit_map(v: &Value, header: [&str; 2], format: Format) {
    match format {
        Format::Json => out(&format!("{v}\n")),
        Format::Csv => {
            out(&csv_line(&[header[0].into(), header[1].into()]));
            if let Value::Object(m) = v {
                for (k, x) in m {
                    let s = x.as_str().map(str::to_string).unwrap_or_else(|| x.to_string());
                    out(&csv_line(&[k.clone(), s]));
                }
            }
        }
    }
}

/// Nested report as pretty JSON, or flattened to path,value rows.
fn emit_report(v: &Value, format: Format) {
    match format {
        Format::Json => out(&format!("{}\n", serde_json::to_string_pretty(v).expect("values serialize"))),
        Format::Csv => {
            out(&csv_line(&["field".into(), "value".into()]));
            let mut rows = Vec::new();
            flatten("", v, &mut rows);
            for (k, x) in rows {
                out(&csv_line(&[k, x]));
            }
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&join(k), x, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten(&join(&i.to_string()), x, out)),
        Value::String(s) => out.push((prefix.into(), s.clone())),
        other => out.push((prefix.into(), other.to_string())),
    }
}

fn cmd_fdg(a: &FdgArgs, cfg: &RunConfig) -> Outcome {
    let order = match a.order {
        Some(o) => o,
        None => resolve_caps(cfg)?["z"],
    };
    let routes: Vec<Route> = match a.route {
        RouteArg::R1 => vec![Route::R1],
        RouteArg::R2 => vec![Route::R2],
        RouteArg::R3 => vec![Route::R3],
        RouteArg::All => vec![Route::R1, Route::R2, Route::R3],
    };
    let r = f_dg(a.d, a.g, order, &routes, None)?;
    if routes.len() == 1 {
        emit_map(&r.routes[0].1.to_json(), ["monomial", "coefficient"], cfg.format);
        return Ok(true);
    }
    emit_report(&r.to_json(), cfg.format);
    Ok(r.agree())
}

fn cmd_hypertail(a: &HypertailArgs, cfg: &RunConfig) -> Outcome {
    let c = resolve_caps(cfg)?;
    let caps = HypertailCaps::new(c["ql"], c["qg"], c["z"]);
    if a.consistency {
        let r = consistency_report(caps)?;
        emit_report(&r.to_json(), cfg.format);
        return Ok(r.example_q1 && r.example_q2 && r.two_variable_corrected_ql0 && r.ql_free_corrected);
    }
    let (locus, caps) = match a.locus {
        LocusArg::Q0 => (Locus::Q0, caps),
        // only the q^{l'}-free part is available on X0
        LocusArg::X0 => (Locus::X0, HypertailCaps { q_l: 0, ..caps }),
    };
    let t = hypertail(locus, caps)?;
    emit_map(&t.to_json(), ["(d1,k,z,H)", "coefficient"], cfg.format);
    Ok(true)
}

fn cmd_loc0(cmd: &Loc0Cmd, cfg: &RunConfig) -> Outcome {
    match cmd {
        Loc0Cmd::Invariant { n_dim, d, twist, ins } => {
            let w = resolve_weights(cfg, *n_dim)?;
            let tw = twist.as_deref().map(TwistSpec::parse).transpose()?;
            let insertions =
                ins.split(',').map(str::trim).filter(|s| !s.is_empty()).map(parse_insertion).collect::<Result<Vec<_>, _>>()?;
            let r = descendant_invariant_pn(*n_dim, *d, &insertions, tw.as_ref(), &w)?;
            let power = nonequivariant_exponent(*n_dim, *d, &insertions, tw.as_ref());
            let value = r.as_monomial().map(|(c, _)| q_str(&c)).unwrap_or_else(|| r.to_string());
            let shown: Vec<String> = insertions.iter().map(|(a, b)| format!("psi^{a} H^{b}")).collect();
            let v = json!({
                "N": n_dim,
                "d": d,
                "twist": tw.map(|t| t.to_string()),
                "insertions": shown,
                "value": value,
                "lambda_power": power,
                "weights": w.weights().iter().map(q_str).collect::<Vec<_>>(),
            });
            emit_report(&v, cfg.format);
            Ok(true)
        }
        Loc0Cmd::Pipeline { name } => {
            let v = match name {
                PipelineArg::P2 => pipeline_p2_example(&resolve_weights(cfg, 2)?)?.to_json(),
                PipelineArg::Quintic1 => pipeline_quintic_degree1(&resolve_weights(cfg, 4)?)?.to_json(),
                PipelineArg::Quintic2 => pipeline_quintic_degree2(&resolve_weights(cfg, 4)?)?.to_json(),
            };
            emit_report(&v, cfg.format);
            Ok(true)
        }
    }
}

fn cmd_verify(suite: &str, cfg: &RunConfig) -> Outcome {
    let rows = run_suite(suite, cfg.seed)?;
    match cfg.format {
        Format::Json => {
            let arr: Vec<Value> = rows.iter().map(|r| r.to_json()).collect();
            out(&format!("{}\n", serde_json::to_string_pretty(&Value::Array(arr)).expect("values serialize")));
        }
        Format::Csv => {
            out(&csv_line(&["criterion".into(), "expected".into(), "got".into(), "pass".into()]));
            for r in &rows {
                out(&csv_line(&[r.criterion.clone(), r.expected.clone(), r.got.clone(), r.pass.to_string()]));
            }
        }
    }
    for r in &rows {
        eprintln!("{} {}", if r.pass { "PASS" } else { "FAIL" }, r.criterion);
    }
    Ok(rows.iter().all(|r| r.pass))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = &cli.config;
    let res = match &cli.cmd {
        Command::Fdg(a) | Command::Genfun { cmd: GenfunCmd::Fdg(a) } => cmd_fdg(a, cfg),
        Command::Hypertail(a) => cmd_hypertail(a, cfg),
        Command::Loc0 { cmd } => cmd_loc0(cmd, cfg),
        Command::Verify { suite } => cmd_verify(suite, cfg),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Guard(m)) => {
            eprintln!("error: {m}");
            eprintln!("lower the degree, marking count or truncation order");
            ExitCode::from(3)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insertions_parse() {
        assert_eq!(parse_insertion("psi^2 H").ok(), Some((2, 1)));
        assert_eq!(parse_insertion("H^3").ok(), Some((0, 3)));
        assert_eq!(parse_insertion("psi*H^2").ok(), Some((1, 2)));
        assert_eq!(parse_insertion("1").ok(), Some((0, 0)));
        assert!(parse_insertion("phi").is_err());
    }

    #[test]
    fn caps_merge_over_profile() {
        let cfg = RunConfig { format: Format::Json, seed: 1, weights: None, caps: Some("z=9".into()), profile: "small".into() };
        let c = resolve_caps(&cfg).ok().unwrap();
        assert_eq!((c["ql"], c["qg"], c["z"]), (1, 3, 9));
        let bad = RunConfig { caps: Some("w=1".into()), ..cfg };
        assert!(resolve_caps(&bad).is_err());
    }

    #[test]
    fn csv_quotes_commas() {
        assert_eq!(csv_line(&["(0,1,0,0)".into(), "x".into()]), "\"(0,1,0,0)\",x\n");
    }

    #[test]
    fn flatten_paths() {
        let mut out = Vec::new();
        flatten("", &json!({"a": {"b": [1, "x"]}}), &mut out);
        assert_eq!(out, vec![("a.b.0".to_string(), "1".to_string()), ("a.b.1".to_string(), "x".to_string())]);
    }
}
