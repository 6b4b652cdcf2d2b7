fn main() {
    std::process::exit(photon_source::harness::cli::main_with_args(std::env::args_os()));
}
