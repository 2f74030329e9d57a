fn main() {
    std::process::exit(instanton_core::cli::run(std::env::args().collect()));
}
