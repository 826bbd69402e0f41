fn main() {
    std::process::exit(tsenor::cli::run());
}
