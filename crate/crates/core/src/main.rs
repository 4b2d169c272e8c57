fn main() {
    std::process::exit(spinform::cli::run(std::env::args_os()));
}
