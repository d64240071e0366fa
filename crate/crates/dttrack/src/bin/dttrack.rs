use std::process::ExitCode;

fn main() -> ExitCode {
    dttrack::cli::main_impl()
}
