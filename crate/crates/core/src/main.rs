fn main() {
    std::process::exit(twotier::cli::run());
}
