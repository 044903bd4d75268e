fn main() {
    std::process::exit(cglb::cli::main_with(std::env::args_os()));
}
