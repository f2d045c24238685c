fn main() {
    std::process::exit(uavsim_cli::run(std::env::args_os()));
}
