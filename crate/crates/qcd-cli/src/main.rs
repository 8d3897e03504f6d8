use std::process::ExitCode;

fn main() -> ExitCode {
    qcd_cli::run()
}
