use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(homodyne_cli::run(std::env::args_os()))
}
