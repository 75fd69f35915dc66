use std::process::ExitCode;

fn main() -> ExitCode {
    segment_forge_cli::app::main_with(std::env::args_os())
}
