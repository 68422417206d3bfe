fn main() {
    std::process::exit(cyclocorr_cli::run(std::env::args_os()));
}
