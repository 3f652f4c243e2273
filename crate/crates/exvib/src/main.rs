fn main() {
    std::process::exit(exvib::cli::run(std::env::args_os()));
}
