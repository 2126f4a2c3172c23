fn main() {
    std::process::exit(parity_cal::cli::run(std::env::args_os()));
}
