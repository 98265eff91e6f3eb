fn main() {
    std::process::exit(quantbound_cli::main_with(std::env::args_os()));
}
