fn main() {
    std::process::exit(lggm::cli::main_entry(std::env::args_os()));
}
