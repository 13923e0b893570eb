fn main() {
    std::process::exit(exhaust_sentinel::cli::run());
}
