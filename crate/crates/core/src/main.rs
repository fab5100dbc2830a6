fn main() {
    std::process::exit(bulkflux::cli::run(std::env::args_os()));
}
