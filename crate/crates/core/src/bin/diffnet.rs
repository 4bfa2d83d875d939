fn main() {
    std::process::exit(diffnet::cli::run(std::env::args_os()));
}
