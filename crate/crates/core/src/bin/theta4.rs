use std::process::ExitCode;

use clap::Parser;
use theta4::cli::{self, Cli};

fn main() -> ExitCode {
    if let Some(n) = std::env::var("THETA4_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // Only fails if a pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let code = cli::run(cli, &mut stdout.lock());
    ExitCode::from(code.code() as u8)
}
