use std::time::Instant;
fn main() {
    let a = magnus_core::ode::corpus::example4_piecewise();
    let t0 = Instant::now();
    let s = magnus_core::magnus::magnus_terms(&a, 30).unwrap();
    println!("ex4 order 30: {:?}", t0.elapsed());
    let t1 = Instant::now();
    let norm = magnus_core::linalg::spectral_norm(&s.term(30).unwrap().evaluate(0.75).unwrap().to_complex());
    println!("  term30 norm at 0.75: {norm:.6e} ({:?})", t1.elapsed());
    let e3 = magnus_core::ode::corpus::example3().piecewise().unwrap().clone();
    let t2 = Instant::now();
    let s3 = magnus_core::magnus::magnus_terms(&e3, 30).unwrap();
    println!("ex3 order 30: {:?}", t2.elapsed());
    let n26 = magnus_core::linalg::spectral_norm(&s3.term(26).unwrap().evaluate(2.0).unwrap().to_complex());
    println!("  ex3 term26 norm at 2.0: {n26:.6e}");
}
