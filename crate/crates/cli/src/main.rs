fn main() {
    std::process::exit(coherence_engine_cli::run(std::env::args_os()));
}
