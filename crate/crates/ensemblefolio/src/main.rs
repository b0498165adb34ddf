fn main() {
    std::process::exit(ensemblefolio::cli::main());
}
