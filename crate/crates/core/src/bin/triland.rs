fn main() {
    std::process::exit(triland::cli::main());
}
