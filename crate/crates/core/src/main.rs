fn main() {
    std::process::exit(symflow::cli::run(std::env::args_os()));
}
