mod args;
mod input;
mod run;

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use pbkit::PbError;
use serde_json::{json, Value};

use args::{AccCmd, Cli, Command};
use input::{sha256_hex, Ctx};
use run::{execute, Body, Output};

pub const SCHEMA_VERSION: u32 = 1;

fn command_name(cmd: &Command) -> String {
    let sub = |s: &str, inner: String| format!("{s} {inner}");
    let tag = |d: &dyn std::fmt::Debug| {
        let s = format!("{d:?}");
        let head = s.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string();
        kebab(&head)
    };
    match cmd {
        Command::Pmf { .. } => "pmf".into(),
        Command::Cdf { .. } => "cdf".into(),
        Command::Mode { .. } => "mode".into(),
        Command::Approx { cmd } => sub("approx", tag(cmd)),
        Command::Sensitivity { .. } => "sensitivity".into(),
        Command::Order { cmd } => sub("order", tag(cmd)),
        Command::Poly { cmd } => sub("poly", tag(cmd)),
        Command::Dist { cmd } => sub("dist", tag(cmd)),
        Command::Acc { cmd: Some(AccCmd::Table { .. }), .. } => "acc appendix".into(),
        Command::Acc { cmd: Some(c), .. } => sub("acc", tag(c)),
        Command::Acc { cmd: None, .. } => "acc".into(),
        Command::Learn { cmd: Some(c), .. } => sub("learn", tag(c)),
        Command::Learn { cmd: None, .. } => "learn".into(),
        Command::GoldenSuite { .. } => "paper-check".into(),
        Command::Replay { .. } => "replay".into(),
    }
}

fn kebab(s: &str) -> String {
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        if c.is_uppercase() {
            if i > 0 {
                out.push('-');
            }
            out.extend(c.to_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

/// Rendered stdout text.
fn render(cli: &Cli, out: &Output) -> String {
    match &out.body {
        Body::Text(t) => t.clone(),
        Body::Json(v) => {
            let mut v = v.clone();
            if let Value::Object(m) = &mut v {
                m.insert("schema_version".into(), json!(SCHEMA_VERSION));
                m.insert("command".into(), json!(command_name(&cli.command)));
                m.insert("mode".into(), json!(cli.mode.name()));
            }
            let mut s = serde_json::to_string_pretty(&v).expect("json output");
            s.push('\n');
            s
        }
    }
}

fn error_json(kind: &str, message: &str) -> String {
    let v = json!({ "schema_version": SCHEMA_VERSION, "error": { "kind": kind, "message": message } });
    format!("{}\n", serde_json::to_string_pretty(&v).expect("json error"))
}

/// Arguments with `--manifest` removed.
fn replay_args(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in argv {
        if skip {
            skip = false;
        } else if a == "--manifest" {
            skip = true;
        } else if !a.starts_with("--manifest=") {
            out.push(a.clone());
        }
    }
    out
}

struct Run {
    text: String,
    code: u8,
    ctx: Ctx,
}

fn run(cli: &Cli) -> Run {
    let mut ctx = Ctx::default();
    match execute(&cli.command, cli.mode, &mut ctx) {
        Ok(out) => Run { text: render(cli, &out), code: u8::from(out.failed), ctx },
        Err(e) => Run { text: error_json(e.kind(), &e.to_string()), code: 1, ctx },
    }
}

fn write_manifest(path: &Path, argv: &[String], cli: &Cli, r: &Run, wall: f64) -> std::io::Result<()> {
    let inputs: Vec<Value> =
        r.ctx.inputs.iter().map(|(src, digest)| json!({ "source": src, "sha256": digest })).collect();
    let m = json!({
        "schema_version": SCHEMA_VERSION,
        "argv": replay_args(argv),
        "mode": cli.mode.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "inputs": inputs,
        "seeds": r.ctx.seeds,
        "generated_seed": r.ctx.generated_seed,
        "wall_time_s": wall,
        "exit_code": r.code,
        "output_sha256": sha256_hex(r.text.as_bytes()),
    });
    std::fs::write(path, format!("{}\n", serde_json::to_string_pretty(&m).expect("manifest json")))
}

fn replay(path: &Path) -> Result<(String, u8), PbError> {
    let text = std::fs::read_to_string(path).map_err(|e| PbError::Parse(format!("{}: {e}", path.display())))?;
    let m: Value = serde_json::from_str(&text).map_err(|e| PbError::Parse(e.to_string()))?;
    let bad = |f: &str| PbError::Parse(format!("manifest field {f:?} missing or malformed"));
    let mut args: Vec<String> = m["argv"]
        .as_array()
        .ok_or_else(|| bad("argv"))?
        .iter()
        .map(|a| a.as_str().map(String::from).ok_or_else(|| bad("argv")))
        .collect::<Result<_, _>>()?;
    if let Some(s) = m["generated_seed"].as_u64() {
        args.extend(["--seed".to_string(), s.to_string()]);
    }
    let mode = m["mode"].as_str().ok_or_else(|| bad("mode"))?;
    args.extend(["--mode".to_string(), mode.to_string()]);
    let expected = m["output_sha256"].as_str().ok_or_else(|| bad("output_sha256"))?;
    let cli = Cli::try_parse_from(std::iter::once("pbkit".to_string()).chain(args.iter().cloned()))
        .map_err(|e| PbError::Parse(format!("manifest argv: {e}")))?;
    if matches!(cli.command, Command::Replay { .. }) {
        return Err(PbError::Domain("a manifest cannot replay another replay".into()));
    }
    let r = run(&cli);
    let actual = sha256_hex(r.text.as_bytes());
    let matches = actual == expected;
    let v = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "replay",
        "argv": args,
        "expected_sha256": expected,
        "actual_sha256": actual,
        "matches": matches,
    });
    Ok((format!("{}\n", serde_json::to_string_pretty(&v).expect("json")), u8::from(!matches)))
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    let started = Instant::now();
    if let Command::Replay { manifest } = &cli.command {
        let (text, code) = replay(manifest).unwrap_or_else(|e| (error_json(e.kind(), &e.to_string()), 1));
        print!("{text}");
        return ExitCode::from(code);
    }
    let r = run(&cli);
    print!("{}", r.text);
    if let Some(seed) = r.ctx.generated_seed {
        eprintln!("seed: {seed}");
    }
    if let Some(path) = &cli.manifest {
        if let Err(e) = write_manifest(path, &argv, &cli, &r, started.elapsed().as_secs_f64()) {
            eprint!("{}", error_json("io", &format!("writing manifest: {e}")));
            return ExitCode::from(1);
        }
    }
    ExitCode::from(r.code)
}
