fn main() {
    std::process::exit(spectral_anon::cli::main());
}
