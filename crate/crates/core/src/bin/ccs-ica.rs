fn main() {
    std::process::exit(ccs_ica::cli::cli_main(std::env::args_os()));
}
