fn main() {
    std::process::exit(spgg::cli::main_with_args(std::env::args_os()));
}
