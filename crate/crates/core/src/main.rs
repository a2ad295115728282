fn main() {
    std::process::exit(qattract::cli::run(std::env::args_os()));
}
