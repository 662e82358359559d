fn main() {
    std::process::exit(noisyal::cli::run(std::env::args_os()));
}
