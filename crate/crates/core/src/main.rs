fn main() {
    std::process::exit(nbl_core::cli::main_with_args(std::env::args_os()));
}
