//! Command-line entry point.

fn main() {
    std::process::exit(membrane_lab::cli::run(std::env::args_os()));
}
