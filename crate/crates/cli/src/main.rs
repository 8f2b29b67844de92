fn main() {
    std::process::exit(xydm_cli::run_cli());
}
