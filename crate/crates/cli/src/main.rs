fn main() {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let status = witsenhausen_cli::run(&argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(status);
}
