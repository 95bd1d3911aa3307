fn main() {
    std::process::exit(tangent_body::cli::run(std::env::args_os()));
}
