fn main() {
    std::process::exit(psido_lab::main_with_args(std::env::args_os()));
}
