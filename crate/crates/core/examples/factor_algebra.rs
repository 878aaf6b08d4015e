// Join, sum-out, reduce and divide on small factors.

use bnmat::model::Factor;

/// Returns `Σ_b φ(a,b)·ψ(b,c)` restricted to `c = 1`, as values over `a`.
pub fn run_example() -> bnmat::Result<Vec<f64>> {
    // φ(A,B), A = var 0, B = var 1, both binary
    let phi = Factor::new(vec![0, 1], vec![2, 2], vec![0.5, 0.5, 0.9, 0.1])?;
    // ψ(B,C), C = var 2
    let psi = Factor::new(vec![1, 2], vec![2, 2], vec![0.3, 0.7, 0.6, 0.4])?;
    let joined = phi.join(&psi)?;
    println!("join scope {:?}, {} entries", joined.scope(), joined.len());
    let reduced = joined.reduce(2, 1)?;
    let summed = reduced.sum_out(1)?;
    println!("after reduce C=1 and sum B: scope {:?} values {:?}", summed.scope(), summed.values());
    let normalized = summed.divide(&Factor::scalar(summed.total()))?;
    println!("normalized: {:?}", normalized.values());
    Ok(summed.values().to_vec())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
