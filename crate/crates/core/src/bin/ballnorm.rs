fn main() {
    std::process::exit(ballnorm::cli::main_with_args(std::env::args_os()));
}
