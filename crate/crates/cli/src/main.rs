fn main() {
    std::process::exit(fieldtrack_cli::commands::run(std::env::args_os()));
}
