fn main() {
    std::process::exit(rayclass::cli::run(std::env::args_os()));
}
