fn main() {
    std::process::exit(qwalk_cli::main_with(std::env::args_os()));
}
