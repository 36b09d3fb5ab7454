fn main() {
    std::process::exit(memcons_cli::run(std::env::args_os()));
}
