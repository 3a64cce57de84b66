use ahyper::analysis::*;
fn main() {
    let t0 = std::time::Instant::now();
    match verify_all(None) {
        Ok(rows) => {
            for row in &rows {
                println!(
                    "{:8} n={} r={:4} expected={:24} ok={} pass={} branch={:?}",
                    row.family, row.n, row.r, row.expected, row.ok, row.verdict.pass,
                    row.verdict.branch
                );
                if !row.ok {
                    for a in &row.verdict.branch_attempts {
                        println!("    branch {} pass={} first_failure={:?}", a.branch, a.pass, a.first_failure);
                    }
                }
            }
            println!("elapsed: {:?}", t0.elapsed());
        }
        Err(e) => println!("ERROR: {e}"),
    }
}
