fn main() -> std::process::ExitCode {
    std::process::ExitCode::from(agg::cli::main_with(std::env::args_os()))
}
