fn main() {
    std::process::exit(codim1lab::cli::main_with_args(std::env::args_os()));
}
