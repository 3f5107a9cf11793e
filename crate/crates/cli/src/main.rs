fn main() {
    if let Err(gdenet_cli::CliError::Input(msg) | gdenet_cli::CliError::Failed(msg)) =
        gdenet_cli::configure_threads()
    {
        eprintln!("gdenet: error: {msg}");
        std::process::exit(2);
    }
    std::process::exit(gdenet_cli::run(std::env::args_os()));
}
