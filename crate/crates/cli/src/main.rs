fn main() {
    std::process::exit(fluxonium_cli::run(std::env::args_os()));
}
