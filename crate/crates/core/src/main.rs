fn main() {
    std::process::exit(swarm_gsp::cli::dispatch(std::env::args_os(), std::env::vars()));
}
