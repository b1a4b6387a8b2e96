use std::io::Write;

fn main() {
    let out = weakhelix::cli::run(std::env::args_os());
    std::io::stdout().write_all(out.stdout.as_bytes()).expect("write stdout");
    std::io::stderr().write_all(out.stderr.as_bytes()).expect("write stderr");
    std::process::exit(out.code);
}
