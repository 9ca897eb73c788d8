fn main() {
    std::process::exit(traffic_tensors::cli::run(std::env::args_os()));
}
