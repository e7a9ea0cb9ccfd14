fn main() {
    std::process::exit(biortho::cli::run(std::env::args_os()));
}
