fn main() {
    std::process::exit(dho::cli::run(std::env::args_os()));
}
