fn main() {
    std::process::exit(causal_locus::cli::run(std::env::args_os()));
}
