//! Parse an expression and read off its value, gradient and hessian.

use weakhelix::expr::{eval_jet2, parse};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (text, u) in [
        ("u1*u2 + exp(u2)", vec![1.0, 0.0]),
        ("sin(u1)^2 + cos(u1)^2", vec![0.7, 0.0]),
        ("u2*log(u1) / (1 + u1^2)", vec![2.0, -1.0]),
    ] {
        let e = parse(text, 2)?;
        let j = eval_jet2(&e, &u)?;
        println!("{text}\n  parsed   {e}\n  at {u:?}: value {:.12}", j.value);
        println!("  gradient {:?}", j.gradient.as_slice());
        println!("  hessian  {:?}\n", j.hessian.as_slice());
    }
    match parse("u1 + u3", 2) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
