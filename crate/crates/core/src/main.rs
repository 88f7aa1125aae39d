use std::process::ExitCode;

fn main() -> ExitCode {
    admissible_games::cli::main()
}
