fn main() {
    std::process::exit(curve_rigidity::cli::run(std::env::args_os()));
}
