fn main() {
    std::process::exit(cliffourier::cli::main());
}
