fn main() {
    std::process::exit(gaussmax_cli::run(std::env::args_os()));
}
