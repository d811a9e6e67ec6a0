use std::io::Write;
use std::process::ExitCode;

use ospcone::cli::{run, SIZE_GUARD_VAR};

fn main() -> ExitCode {
    let out = run(std::env::args_os(), std::env::var(SIZE_GUARD_VAR).ok(), &mut std::io::stdin());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    ExitCode::from(out.code as u8)
}
