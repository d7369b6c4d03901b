fn main() {
    std::process::exit(locsep_cli::run_command(std::env::args_os()));
}
