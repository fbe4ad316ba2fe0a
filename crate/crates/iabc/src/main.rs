use std::process::ExitCode;

fn main() -> ExitCode {
    iabc::cli::main()
}
