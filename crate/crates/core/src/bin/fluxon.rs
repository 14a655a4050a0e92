fn main() {
    std::process::exit(fluxon::cli::run(std::env::args_os()));
}
