fn main() {
    std::process::exit(mintau::cli::run(std::env::args_os()));
}
