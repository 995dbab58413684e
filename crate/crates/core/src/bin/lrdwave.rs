fn main() {
    std::process::exit(lrdwave::cli::main_with_args(std::env::args_os()));
}
