use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    hypolab::linalg::init_sequential_kernels();
    let args = hypolab::cli::Args::parse();
    std::process::exit(hypolab::cli::execute(&args));
}
