fn main() {
    std::process::exit(infoplan::cli::main_with_env());
}
