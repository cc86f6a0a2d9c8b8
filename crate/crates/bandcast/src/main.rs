fn main() {
    std::process::exit(bandcast::cli::run_from(std::env::args_os()));
}
