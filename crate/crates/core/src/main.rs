fn main() {
    std::process::exit(rdmass::cli::main_with_args(std::env::args_os()));
}
