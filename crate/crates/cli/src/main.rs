fn main() {
    std::process::exit(dsim_cli::run_command(std::env::args_os()));
}
