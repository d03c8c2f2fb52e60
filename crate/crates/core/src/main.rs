fn main() {
    std::process::exit(theta_geodesics::cli::run(std::env::args_os()));
}
