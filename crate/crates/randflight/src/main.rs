fn main() {
    std::process::exit(randflight::cli::main_with_args(std::env::args_os()));
}
