fn main() {
    std::process::exit(caustica::run_cli());
}
