use std::io::Write;

use clap::Parser;

use topomin::cli::{run, Cli, EXIT_ERROR, EXIT_OK};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { EXIT_ERROR } else { EXIT_OK });
        }
    };
    let report = run(&cli, &args[1..].join(" "));
    // A closed pipe downstream is not an error of the run.
    let _ = writeln!(std::io::stdout().lock(), "{}", report.to_json());
    if let Some(msg) = &report.error {
        eprintln!("error: {msg}");
    }
    std::process::exit(report.exit_code());
}
