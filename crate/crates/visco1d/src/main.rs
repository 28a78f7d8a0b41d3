fn main() {
    std::process::exit(visco1d::cli::main_entry());
}
