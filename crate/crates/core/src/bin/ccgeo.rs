fn main() {
    std::process::exit(conformal_geodesics::cli::run(std::env::args_os()));
}
