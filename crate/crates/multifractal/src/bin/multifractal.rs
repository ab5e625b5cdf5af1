use std::process::ExitCode;

fn main() -> ExitCode {
    multifractal::cli::main()
}
