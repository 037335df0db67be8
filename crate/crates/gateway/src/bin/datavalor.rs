use std::process::ExitCode;

fn main() -> ExitCode {
    let stdin = std::io::stdin();
    let code = datavalor_gateway::cli::run(
        std::env::args_os(),
        &mut stdin.lock(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    ExitCode::from(code)
}
