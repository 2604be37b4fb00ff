fn main() {
    std::process::exit(waveheat::cli::main_with_args(std::env::args_os()));
}
