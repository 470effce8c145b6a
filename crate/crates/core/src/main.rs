fn main() {
    std::process::exit(fracap::cli::run_from_env());
}
