use std::process::ExitCode;

fn main() -> ExitCode {
    vacuumlab_cli::run(std::env::args_os())
}
