fn main() {
    std::process::exit(dod_rom::cli::run(std::env::args_os()));
}
