fn main() {
    std::process::exit(cvchip::cli::main_with_args(std::env::args_os()));
}
