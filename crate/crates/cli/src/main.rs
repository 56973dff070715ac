fn main() {
    std::process::exit(msep_cli::run(std::env::args_os()));
}
