fn main() {
    std::process::exit(cradar_core::harness::cli::main_with(std::env::args_os()));
}
