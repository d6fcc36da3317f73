fn main() {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let env = |k: &str| std::env::var(k).ok();
    let code = ondt_service::cli::run(std::env::args_os(), &env, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
