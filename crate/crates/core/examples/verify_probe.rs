use num_complex::Complex64;
use rmnc_core::dynamics::evolve_g;
use std::io::Write;
use std::time::Instant;

fn main() {
    let g0 = |w: Complex64| 1.0 / w;
    for t in [7.5, 20.0, 50.0] {
        for k in 0..10 {
            let w = Complex64::new(-2.7 + 0.6 * k as f64, 1.0);
            let t0 = Instant::now();
            let field = evolve_g(&g0, 0.0, 1.0, &[w], t, 1e-3);
            let ok = field.values[0].is_some();
            println!("t={t} w={w}: ok={ok} elapsed={:.1?}", t0.elapsed());
            std::io::stdout().flush().unwrap();
        }
    }
}
