use std::io::{Read, Write};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mut stdin = String::new();
    if dentlab::cli::wants_stdin(&args) {
        if let Err(e) = std::io::stdin().read_to_string(&mut stdin) {
            eprintln!("error: cannot read standard input: {e}");
            std::process::exit(2);
        }
    }
    let out = dentlab::cli::run(&args, &stdin);
    std::io::stdout().write_all(out.stdout.as_bytes()).ok();
    std::io::stderr().write_all(out.stderr.as_bytes()).ok();
    std::process::exit(out.code);
}
