fn main() {
    std::process::exit(adascale_core::cli::main());
}
