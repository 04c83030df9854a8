fn main() {
    std::process::exit(pathweave::cli::cli_main(std::env::args_os()));
}
