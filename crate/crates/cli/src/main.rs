fn main() {
    std::process::exit(aap_cli::run(std::env::args_os()));
}
