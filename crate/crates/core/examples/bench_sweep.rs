use std::time::Instant;
fn main() {
    let a = magnus_core::ode::corpus::example4();
    let t0 = Instant::now();
    let result = magnus_core::diagnostics::kappa_sweep(&a, 1.0, 64).unwrap();
    println!("sweep time: {:?}", t0.elapsed());
    match &result.earliest {
        Some(hit) => println!(
            "alpha* = {:.6}  t* = {:.6}  lambda* = {:.6} + {:.6}i  gap = {:.3e}  defective = {}  winding = {}  alg/geo = {}/{}",
            hit.alpha, hit.event.t_star, hit.event.lambda_star.re, hit.event.lambda_star.im,
            hit.event.gap, hit.event.defective, hit.event.winding, hit.event.algebraic, hit.event.geometric
        ),
        None => println!("no qualifying event"),
    }
    println!("qualifying count: {}", result.qualifying.len());
}
