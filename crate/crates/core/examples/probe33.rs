// Temporary: dump the failing oracle case for high-precision analysis.
use nlwr::{exp_average, BoundaryPolicy, DensityField};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_field(rng: &mut StdRng, boundary: BoundaryPolicy) -> DensityField {
    let n = rng.gen_range(1..=400);
    let dx = rng.gen_range(1e-4..0.1);
    let x0 = rng.gen_range(-1.0..1.0);
    let values = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    DensityField::new(x0, dx, values, boundary).unwrap()
}

fn main() {
    let mut rng = StdRng::seed_from_u64(0x6b65726e);
    for case in 0..=33 {
        let boundary = if case % 2 == 0 {
            BoundaryPolicy::ConstantExtension
        } else {
            BoundaryPolicy::Periodic
        };
        let field = random_field(&mut rng, boundary);
        let eps = rng.gen_range(0.3..30.0) * field.dx();
        if case == 33 {
            println!("boundary {:?} n {} dx {:.17e} eps {:.17e}", boundary, field.len(), field.dx(), eps);
            let q = exp_average(&field, eps).unwrap();
            println!("q177 {:.17e}", q.values()[177]);
            let vals: Vec<String> = field.values().iter().map(|v| format!("{v:.17e}")).collect();
            std::fs::write("/tmp/case33.txt", vals.join("\n")).unwrap();
        }
    }
}
