fn main() {
    std::process::exit(hetero_ap::cli::main_with_args(std::env::args_os()));
}
