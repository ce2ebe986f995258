fn main() {
    std::process::exit(corrgeo::cli::run(std::env::args_os()));
}
