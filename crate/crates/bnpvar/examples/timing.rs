use bnpvar::archive::DrawArchive;
use bnpvar::network::map_adjacency;
use bnpvar::sampler::{Hyperparameters, Sampler, SamplerMode};
use bnpvar::var::{BlockPartitioning, DgpConfig, PanelSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn main() {
    let cap: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(30.0);
    for seed in 0..10u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let (data, truth) = bnpvar::var::simulate_var(&DgpConfig::block(20, 100), &mut rng).unwrap();
        let spec = PanelSpec::var(20, 1).unwrap();
        let mut hyper = Hyperparameters::default();
        hyper.sparse_shape_cap = cap;
        hyper.mcmc.iterations = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(5000);
        hyper.mcmc.burn_in = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(500);
        hyper.mcmc.thin = 5;
        let sampler = Sampler::new(spec, BlockPartitioning::PerLag, hyper.clone()).unwrap();
        let t0 = std::time::Instant::now();
        let records = sampler.run(&data, &mut rng).unwrap();
        let arch = DrawArchive::new(spec, BlockPartitioning::PerLag, data.labels.clone(), records);
        let adj = map_adjacency(&arch, 0, 0.5).unwrap();
        let (mut tp, mut fp, mut pos, mut neg) = (0, 0, 0, 0);
        let mut missed: Vec<f64> = Vec::new();
        for i in 0..20 {
            for j in 0..20 {
                let t = truth[(i, j)] != 0.0;
                let e = adj[(i, j)] != 0;
                if t { pos += 1; if e { tp += 1; } else { missed.push(truth[(i, j)].abs()); } }
                else { neg += 1; if e { fp += 1; } }
            }
        }
        missed.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let big_miss = missed.iter().filter(|m| **m > 0.3).count();
        eprintln!("  missed sizes: n={} over0.3={} max={:.3}", missed.len(), big_miss, missed.last().copied().unwrap_or(0.0));
        // posterior mean MSD vs blasso
        let n = arch.layout.coefficient_count();
        let mut mean = vec![0.0; n];
        for rec in &arch.records { for (m, b) in mean.iter_mut().zip(&rec.beta) { *m += b; } }
        mean.iter_mut().for_each(|m| *m /= arch.records.len() as f64);
        let west = arch.layout.unvec_coefficients(&nalgebra::DVector::from_vec(mean));
        let best = arch.layout.lag_matrix(&arch.layout.vec_coefficients(&west), 0);
        let msd_bnp = bnpvar::evaluate::msd(&best, &truth).unwrap();
        let mut h2 = hyper.clone();
        h2.mode = SamplerMode::BayesianLasso;
        let s2 = Sampler::new(spec, BlockPartitioning::PerLag, h2).unwrap();
        let mut rng2 = ChaCha12Rng::seed_from_u64(seed + 1000);
        let rec2 = s2.run(&data, &mut rng2).unwrap();
        let mut mean2 = vec![0.0; n];
        for rec in &rec2 { for (m, b) in mean2.iter_mut().zip(&rec.beta) { *m += b; } }
        mean2.iter_mut().for_each(|m| *m /= rec2.len() as f64);
        let w2 = arch.layout.unvec_coefficients(&nalgebra::DVector::from_vec(mean2));
        let b2 = arch.layout.lag_matrix(&arch.layout.vec_coefficients(&w2), 0);
        let msd_bl = bnpvar::evaluate::msd(&b2, &truth).unwrap();
        println!(
            "cap {cap} seed {seed}: recovery {}/{} = {:.3}, fp {}/{} = {:.3}, msd bnp {:.5} blasso {:.5}, {:.1}s",
            tp, pos, tp as f64 / pos as f64, fp, neg, fp as f64 / neg as f64, msd_bnp, msd_bl,
            t0.elapsed().as_secs_f64()
        );
    }
}
