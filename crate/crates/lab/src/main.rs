fn main() {
    cce_lab::cli::run()
}
