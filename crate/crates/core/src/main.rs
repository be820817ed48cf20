fn main() {
    std::process::exit(fractal_spectra::cli::run(std::env::args_os()));
}
