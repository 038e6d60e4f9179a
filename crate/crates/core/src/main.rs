use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(ballmodal::cli::run(std::env::args_os()))
}
