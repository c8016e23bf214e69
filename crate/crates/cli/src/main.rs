fn main() {
    std::process::exit(dispersym::run(std::env::args_os()));
}
