fn main() {
    std::process::exit(qollide::cli::run(std::env::args_os()));
}
