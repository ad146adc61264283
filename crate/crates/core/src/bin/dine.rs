fn main() {
    std::process::exit(dine::cli::main_entry());
}
