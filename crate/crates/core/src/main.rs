fn main() {
    std::process::exit(hjb_lab::cli::run(std::env::args_os()));
}
