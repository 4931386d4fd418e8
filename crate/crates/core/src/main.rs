fn main() {
    std::process::exit(tsvar::cli::run(std::env::args_os()));
}
