fn main() {
    std::process::exit(fracnls::cli::main());
}
