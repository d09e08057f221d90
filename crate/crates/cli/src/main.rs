fn main() {
    std::process::exit(liyau_cli::run_from(std::env::args_os()));
}
