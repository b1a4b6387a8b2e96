//! Run every verifier on its catalog instances and tabulate the verdicts.

use weakhelix::theorems::{catalog_suite, VerifyParams};

fn main() -> weakhelix::Result<()> {
    let params = VerifyParams::default();
    for (case, report) in catalog_suite(&params)? {
        let worst = report
            .conclusions
            .iter()
            .map(|c| format!("{}={:.2e}", c.name, c.value))
            .collect::<Vec<_>>()
            .join(" ");
        let flag = if report.verdict == case.expected { "" } else { "  <-- unexpected" };
        println!("{:>9} {:>20} {:>18}  {worst}{flag}", report.theorem.to_string(), report.instance.manifold, report.verdict.to_string());
    }
    Ok(())
}
