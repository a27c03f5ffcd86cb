fn main() {
    std::process::exit(saferoute_cli::run(std::env::args_os()));
}
