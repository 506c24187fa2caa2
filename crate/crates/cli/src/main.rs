fn main() {
    std::process::exit(rofsum_cli::main_with_args(std::env::args_os()));
}
