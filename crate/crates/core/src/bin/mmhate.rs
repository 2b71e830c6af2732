fn main() {
    std::process::exit(mmhate::cli::run(std::env::args_os()));
}
