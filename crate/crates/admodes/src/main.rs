use std::io::Write;
use std::process::ExitCode;

use admodes::cli::{run, Args, CliRequest};
use clap::Parser;

fn main() -> ExitCode {
    let args = Args::parse();
    let out = run(&CliRequest::from(args));
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    ExitCode::from(out.code as u8)
}
