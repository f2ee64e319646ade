fn main() {
    std::process::exit(semisobolev::cli::run(std::env::args_os()));
}
