fn main() {
    std::process::exit(sigmadamp::cli::run(std::env::args_os()));
}
