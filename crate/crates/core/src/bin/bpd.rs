use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use bpd::cli::{run, Cli};

fn main() -> ExitCode {
    if let Some(threads) = std::env::var("BPD_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if threads > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let _ = std::io::stdout().write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
