fn main() {
    std::process::exit(descry_cli::run(std::env::args_os()));
}
