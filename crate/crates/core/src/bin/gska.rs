fn main() {
    std::process::exit(gauss_ska::cli::run(std::env::args_os()));
}
