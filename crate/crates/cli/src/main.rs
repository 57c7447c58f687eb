fn main() {
    std::process::exit(twoweight::run(std::env::args_os()));
}
