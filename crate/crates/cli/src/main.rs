fn main() {
    std::process::exit(dsy_cli::run(std::env::args_os()));
}
