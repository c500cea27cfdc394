fn main() {
    std::process::exit(apdyn::cli::run(std::env::args_os()));
}
