fn main() {
    std::process::exit(quantum_market::cli::main_with_args(std::env::args_os()));
}
