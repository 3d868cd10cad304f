fn main() {
    std::process::exit(vpsim::cli::main());
}
