fn main() {
    std::process::exit(evac_cli::parse_and_dispatch(std::env::args_os()));
}
