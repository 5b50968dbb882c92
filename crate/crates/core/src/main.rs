fn main() {
    std::process::exit(barrier_critical::cli::run(std::env::args()));
}
