fn main() {
    std::process::exit(memsflow::cli::main_with_args(std::env::args_os()));
}
