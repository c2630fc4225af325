fn main() {
    std::process::exit(cmcflow::cli::main_with_args(std::env::args_os()));
}
