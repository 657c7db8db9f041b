fn main() {
    std::process::exit(phasecons::cli::run(std::env::args_os()));
}
