fn main() {
    std::process::exit(absa::cli::main());
}
