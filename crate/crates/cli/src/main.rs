fn main() {
    std::process::exit(exitspec_cli::run(std::env::args_os()));
}
