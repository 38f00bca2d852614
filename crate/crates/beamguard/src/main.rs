fn main() {
    let mut stdout = std::io::stdout();
    let code = beamguard::cli::run_from(std::env::args_os(), &mut stdout);
    std::process::exit(code);
}
