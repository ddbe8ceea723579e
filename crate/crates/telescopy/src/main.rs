fn main() {
    env_logger::init();
    std::process::exit(telescopy::cli::run(std::env::args_os()));
}
