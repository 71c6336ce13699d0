fn main() {
    std::process::exit(pisum::cli::main_with_args(std::env::args_os()));
}
