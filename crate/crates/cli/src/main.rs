use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use qso_cli::{run, Cli};
use qso_core::DEFAULT_CELL_CAP;

fn cell_cap() -> Result<usize, String> {
    match std::env::var("QSO_CELL_CAP") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(cap) if cap > 0 => Ok(cap),
            _ => Err(format!(
                "QSO_CELL_CAP must be a positive integer, got {v:?}"
            )),
        },
        Err(_) => Ok(DEFAULT_CELL_CAP),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cap = match cell_cap() {
        Ok(cap) => cap,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = run(cli, cap, &mut out);
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
