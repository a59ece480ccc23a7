fn main() {
    std::process::exit(hilbert_eisenstein::cli::main_with_args(std::env::args_os()));
}
