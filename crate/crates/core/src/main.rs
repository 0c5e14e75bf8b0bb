use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(polyglot_ctc::cli::run())
}
