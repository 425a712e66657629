fn main() {
    std::process::exit(ncschwartz::cli::run(std::env::args_os()));
}
