fn main() {
    std::process::exit(relens::cli::run(std::env::args()));
}
