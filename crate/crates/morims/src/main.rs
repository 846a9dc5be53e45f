fn main() {
    std::process::exit(morims::cli::run(std::env::args_os()));
}
