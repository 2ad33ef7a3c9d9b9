fn main() {
    std::process::exit(wfde::cli::main_with_args(std::env::args_os()));
}
