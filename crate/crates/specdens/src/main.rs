fn main() {
    std::process::exit(specdens::cli::run(std::env::args_os()));
}
