fn main() {
    std::process::exit(waveops_cli::run(std::env::args_os()));
}
