fn main() {
    std::process::exit(devpatch::cli::main_with_args(std::env::args_os()));
}
