fn main() { std::process::exit(vortexlab::cli::run_from_env()); }
