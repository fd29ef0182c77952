fn main() {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .init();
    std::process::exit(atlas_server::run(std::env::args_os()));
}
