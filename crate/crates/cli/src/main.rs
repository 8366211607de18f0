fn main() {
    std::process::exit(bilinear_cli::run(std::env::args()));
}
