fn main() {
    std::process::exit(quaydeck::cli::run(std::env::args_os()));
}
