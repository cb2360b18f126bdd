fn main() {
    std::process::exit(korobov_star::cli::main());
}
