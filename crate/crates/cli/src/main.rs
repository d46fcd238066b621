use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = match spencer_cli::args::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    ExitCode::from(spencer_cli::run(&cli))
}
