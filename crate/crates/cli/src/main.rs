fn main() {
    std::process::exit(stable_est_cli::run(std::env::args().collect()));
}
