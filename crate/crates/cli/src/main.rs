fn main() {
    std::process::exit(sramsim_cli::main_from_env());
}
