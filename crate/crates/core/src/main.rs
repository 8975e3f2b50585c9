use std::process::ExitCode;

use qp_transport::io::{execute, parse_cli};
use qp_transport::Error;

fn main() -> ExitCode {
    let result = parse_cli(std::env::args_os()).and_then(|cfg| execute(&cfg));
    match result {
        Ok(outcome) => {
            println!("{}", outcome.report);
            if outcome.manifest.failed_cells > 0 {
                eprintln!(
                    "warning: {} cells failed; see manifest.json",
                    outcome.manifest.failed_cells
                );
            }
            ExitCode::SUCCESS
        }
        Err(e @ Error::Cli(_)) => {
            let code = e.exit_code();
            if let Error::Cli(inner) = e {
                let _ = inner.print();
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
