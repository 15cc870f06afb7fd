fn main() {
    std::process::exit(locfit_cli::run(std::env::args_os()));
}
