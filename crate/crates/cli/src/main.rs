fn main() {
    std::process::exit(symlab::main_with_args(std::env::args()));
}
