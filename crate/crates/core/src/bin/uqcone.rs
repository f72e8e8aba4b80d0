fn main() {
    std::process::exit(uqcone::cli::main_from_env());
}
