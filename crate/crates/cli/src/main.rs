fn main() {
    std::process::exit(hppk_qpp_cli::run(std::env::args_os()));
}
