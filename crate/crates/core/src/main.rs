fn main() {
    std::process::exit(bfield_coulomb::cli::dispatch(std::env::args_os()));
}
