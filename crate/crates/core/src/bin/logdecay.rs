fn main() {
    std::process::exit(logdecay::cli::run(std::env::args_os()));
}
