fn main() {
    std::process::exit(dqchain::cli::run(std::env::args_os()));
}
