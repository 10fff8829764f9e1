fn main() {
    std::process::exit(netjacobi::cli::run(std::env::args_os()));
}
