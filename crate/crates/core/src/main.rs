fn main() {
    std::process::exit(qaw::cli::run());
}
