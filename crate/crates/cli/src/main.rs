fn main() {
    std::process::exit(psg_cli::run_main(std::env::args_os()));
}
