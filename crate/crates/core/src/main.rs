use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let outcome = ksbound::cli::run(&args);
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let _ = lock.write_all(outcome.stdout.as_bytes());
    let _ = lock.flush();
    if !outcome.stderr.is_empty() {
        eprint!("{}", outcome.stderr);
    }
    ExitCode::from(outcome.code)
}
