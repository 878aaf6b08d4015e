fn main() {
    std::process::exit(bnmat::cli::main());
}
