use std::process::ExitCode;

use ucdoc_cli::{run, Context, TAXONOMY_ENV};

fn main() -> ExitCode {
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut ctx = Context {
        stdin: &mut stdin.lock(),
        stdout: &mut stdout.lock(),
        stderr: &mut stderr.lock(),
        taxonomy_env: std::env::var_os(TAXONOMY_ENV).filter(|v| !v.is_empty()).map(Into::into),
    };
    let status = run(std::env::args_os(), &mut ctx);
    ExitCode::from(status.code() as u8)
}
