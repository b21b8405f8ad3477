fn main() {
    std::process::exit(prosinfo::cli::main_with_args(std::env::args_os()));
}
