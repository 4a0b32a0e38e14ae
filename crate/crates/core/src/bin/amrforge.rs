use std::io::{self, BufWriter};
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdin = io::stdin();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let code = amrforge::cli::run(std::env::args_os(), &mut stdin.lock(), &mut out, &mut io::stderr());
    ExitCode::from(code as u8)
}
