fn main() {
    std::process::exit(ticlq::cli::run(std::env::args_os()));
}
