use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use lienard::cli::Args;
use lienard::commands;

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = args.into_config().and_then(|cfg| commands::run(&cfg).map(|o| (cfg, o)));
    match result {
        Ok((cfg, outcome)) => {
            match &cfg.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &outcome.body) {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(1);
                    }
                    println!("{}", outcome.summary);
                }
                None => {
                    let mut out = std::io::stdout().lock();
                    let _ = out.write_all(outcome.body.as_bytes());
                    eprintln!("{}", outcome.summary);
                }
            }
            ExitCode::from(outcome.status as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
