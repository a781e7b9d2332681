use std::io::{IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::mpsc;
use std::time::{Duration, Instant};

use clap::{Parser, ValueEnum};

use conslaw::cli::{batch, dispatch, CliError};
use conslaw::conslaw::CancelToken;
use conslaw::expr::RuleSet;
use conslaw::report::{Report, SCHEMA};
use conslaw::session::load_session;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
    Latex,
}

/// Conservation laws of PDE systems from adjoint symmetries.
#[derive(Parser, Debug)]
#[command(name = "conslaw-kit", version)]
struct Args {
    /// variational-check, symmetry-check, adjoint-check, substitution-check,
    /// selfadjoint-check, multiplier-check, conslaw, verify, ansatz, batch
    /// or schema
    command: String,
    /// Command arguments: object names or inline `eta=...`, `phi=...`
    args: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Session file declaring the system and named objects
    #[arg(long)]
    session: Option<PathBuf>,
    /// Wall-clock limit in seconds
    #[arg(long)]
    timeout: Option<f64>,
    /// Ignore the session's rewrite rules
    #[arg(long)]
    no_rules: bool,
}

fn color() -> bool {
    match std::env::var("CONSLAW_COLOR").as_deref() {
        Ok("1") => true,
        Ok("0") => false,
        _ => std::io::stdout().is_terminal(),
    }
}

fn render(r: &Report, f: Format) -> String {
    match f {
        Format::Text => r.to_text(color()),
        Format::Json => r.to_json() + "\n",
        Format::Latex => r.to_latex(),
    }
}

fn run(args: &Args, cancel: &CancelToken) -> Report {
    let label = std::iter::once(args.command.as_str())
        .chain(args.args.iter().map(String::as_str))
        .collect::<Vec<_>>()
        .join(" ");
    let Some(path) = &args.session else {
        return Report::error(label, "--session FILE is required");
    };
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => return Report::error(label, format!("{}: {}", path.display(), e)),
    };
    let session = match load_session(&src) {
        Ok(s) => s,
        Err(e) => return Report::error(label, format!("{}:{}", path.display(), e)),
    };
    let sys = match session.require_system() {
        Ok(sys) if args.no_rules => sys.with_rules(RuleSet::empty()),
        Ok(sys) => sys.clone(),
        Err(e) => return Report::error(label, e),
    };
    let out = if args.command == "batch" {
        if !args.args.is_empty() {
            return Report::error(label, "batch takes no arguments");
        }
        batch(&session, &sys, cancel)
    } else {
        let mut words = vec![args.command.clone()];
        words.extend(args.args.iter().cloned());
        dispatch(&session, &sys, &words, cancel)
    };
    match out {
        Ok(r) => r,
        Err(CliError::Timeout) => Report::error(label, "timed out"),
        Err(e) => Report::error(label, e.to_string()),
    }
}

fn emit(text: &str, code: i32) -> ExitCode {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    let _ = out.flush();
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.command == "schema" {
        return emit(SCHEMA, 0);
    }
    let format = args.format;
    let timeout = match args.timeout {
        Some(t) if !(t.is_finite() && t > 0.0) => {
            let r = Report::error(
                args.command.clone(),
                "--timeout must be a positive number of seconds",
            );
            return emit(&render(&r, format), 2);
        }
        Some(t) => Some(Duration::from_secs_f64(t)),
        None => None,
    };
    let cancel = match timeout {
        Some(t) => CancelToken::with_deadline(Instant::now() + t),
        None => CancelToken::new(),
    };
    let label = args.command.clone();
    let (tx, rx) = mpsc::channel();
    let worker_cancel = cancel.clone();
    std::thread::spawn(move || {
        let _ = tx.send(run(&args, &worker_cancel));
    });
    let report = match timeout {
        Some(t) => rx.recv_timeout(t).ok(),
        None => rx.recv().ok(),
    };
    let report = report.unwrap_or_else(|| {
        cancel.cancel();
        Report::error(label, "timed out")
    });
    emit(&render(&report, format), report.exit_code())
}
