use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use symred_cli::{execute, exit, report, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = cli.command.split();
    let rep = execute(cmd, args);
    let text = report::render(&rep.to_json());
    let written = match &args.out {
        Some(path) => std::fs::write(path, &text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Some(e) = &rep.error {
        eprintln!("symred {}: {} in stage `{}`: {}", cmd.name(), e.kind, e.stage, e.message);
    }
    match written {
        Ok(()) => ExitCode::from(rep.exit_code as u8),
        Err(e) => {
            eprintln!("symred: cannot write report: {e}");
            ExitCode::from(exit::CONFIG as u8)
        }
    }
}
