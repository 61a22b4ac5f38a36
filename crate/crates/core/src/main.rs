fn main() {
    std::process::exit(greedylab::cli::run(std::env::args_os()));
}
