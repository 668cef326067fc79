fn main() {
    std::process::exit(simgroup::cli::run(std::env::args_os()));
}
