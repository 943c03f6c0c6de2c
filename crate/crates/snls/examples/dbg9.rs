use num_complex::Complex64;
use snls::*;
fn main() {
    let grid = Grid::new(1, 32, 128).unwrap();
    let params = EquationParams::new(1, Complex64::new(-1.0, 0.0), 2.0, 1).unwrap();
    let spec = NoiseSpec::new(0.4, 1.2, 0.05, 1.2).unwrap();
    let u0 = config::build_initial(&grid, "modulated-cosine", 0.3, None, None).unwrap();
    let levels = 4usize;
    let base_steps = 100usize;
    let fine_steps = base_steps * 4usize.pow(3);
    let fine_dt = 1.0 / fine_steps as f64;
    for seed in [314u64, 1, 2, 3, 4, 5, 6, 7, 8] {
        let mut errors = vec![Vec::new(); levels - 1];
        for path in 0..64u64 {
            let mut rng = PathRng::new(seed, path);
            let fine: Vec<f64> = (0..fine_steps).map(|_| rng.brownian_increment(fine_dt)).collect();
            let mut terminals = Vec::new();
            for level in 0..levels {
                let group = 4usize.pow((levels - 1 - level) as u32);
                let dt = fine_dt * group as f64;
                let mut u = u0.clone();
                for chunk in fine.chunks(group) {
                    let dw: f64 = chunk.iter().sum();
                    u = step_exponential_em(&u, dt, dw, &params, &spec);
                }
                terminals.push(u);
            }
            for level in 0..levels - 1 {
                let d = terminals[level].axpy(Complex64::new(-1.0, 0.0), &terminals[level + 1]).unwrap()
                    .sobolev_norm(SobolevIndex(2.0));
                errors[level].push(d);
            }
        }
        let med: Vec<f64> = errors.iter().map(|v| {
            let mut s = v.clone();
            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            0.5 * (s[31] + s[32])
        }).collect();
        println!("seed {seed}: ratios {:.3}, {:.3}", med[0] / med[1], med[1] / med[2]);
    }
}
