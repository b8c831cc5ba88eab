fn main() {
    std::process::exit(nwh_cli::run(std::env::args_os()));
}
