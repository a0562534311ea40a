fn main() {
    std::process::exit(pseudoexp::cli::run(std::env::args_os()));
}
