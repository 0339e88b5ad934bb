fn main() {
    std::process::exit(wishart_dp::cli::main_with_args(std::env::args_os()));
}
