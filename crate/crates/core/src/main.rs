fn main() {
    std::process::exit(chi3_core::cli::run(std::env::args_os()));
}
