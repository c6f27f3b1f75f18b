fn main() {
    std::process::exit(orthoplex::cli::main_with_args(std::env::args_os()));
}
