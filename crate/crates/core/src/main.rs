fn main() {
    std::process::exit(rematch::cli::run(std::env::args_os()));
}
