fn main() {
    std::process::exit(screenlab::cli::run(std::env::args_os()));
}
