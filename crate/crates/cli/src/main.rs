fn main() {
    std::process::exit(sepfid_cli::run(std::env::args_os()));
}
