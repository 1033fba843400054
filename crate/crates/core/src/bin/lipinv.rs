fn main() {
    std::process::exit(lipinv::cli::main_with_args(std::env::args_os()));
}
