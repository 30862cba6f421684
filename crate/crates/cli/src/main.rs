use std::process::ExitCode;

fn main() -> ExitCode {
    lossforge_cli::run(std::env::args_os())
}
