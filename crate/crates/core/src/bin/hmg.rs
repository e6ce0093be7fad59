use env_logger::Env;

fn main() {
    env_logger::Builder::from_env(Env::new().filter_or("HMG_LOG", "warn")).init();
    let code = hybrid_mg::cli::run_cli(std::env::args_os(), &mut std::io::stdout());
    std::process::exit(code);
}
