fn main() {
    std::process::exit(monocert::cli::run(std::env::args_os()));
}
