//! Drive the command-line interface in process and show its documents.

use weakhelix::cli::run;

fn main() {
    for args in [
        vec!["weakhelix", "analyze", "cone", "--direction", "0,0,1"],
        vec!["weakhelix", "verify", "3.8", "cone", "--direction", "0,0,1"],
        vec!["weakhelix", "verify", "3.2", "sphere", "--direction", "0,0,1"],
        vec!["weakhelix", "trace", "cone", "--seed", "0,0"],
    ] {
        let out = run(&args);
        println!("$ {}\nexit {}", args[1..].join(" "), out.code);
        print!("{}", out.stdout);
        eprint!("{}", out.stderr);
        println!();
    }
}
