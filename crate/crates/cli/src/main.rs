fn main() {
    std::process::exit(coopsir_cli::run_cli(std::env::args_os()));
}
