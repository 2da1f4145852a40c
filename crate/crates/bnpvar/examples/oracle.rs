use bnpvar::sampler::DesignData;
use bnpvar::var::{BlockPartitioning, CoefficientLayout, DgpConfig, PanelSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn main() {
    for seed in 0..5u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let (data, truth) = bnpvar::var::simulate_var(&DgpConfig::block(20, 100), &mut rng).unwrap();
        let spec = PanelSpec::var(20, 1).unwrap();
        let layout = CoefficientLayout::new(spec, BlockPartitioning::PerLag);
        let design = DesignData::new(&data, &spec, &layout).unwrap();
        let xtx = design.x.transpose() * &design.x;
        let xtx_inv = xtx.clone().try_inverse().unwrap();
        let ols = &xtx_inv * design.x.transpose() * &design.y; // k x q
        let resid = &design.y - &design.x * &ols;
        let t_eff = design.t_eff as f64;
        let k = spec.regressor_count() as f64;
        // per-equation sigma^2, per-coefficient t statistics on the lag part
        let (mut det2, mut det3, mut pos) = (0, 0, 0);
        let mut small = 0;
        for eq in 0..20 {
            let s2 = resid.column(eq).norm_squared() / (t_eff - k);
            for j in 0..20 {
                if truth[(eq, j)] != 0.0 {
                    pos += 1;
                    if truth[(eq, j)].abs() < 0.2 { small += 1; }
                    let reg = layout.regressor_of_series(j, 0);
                    let se = (s2 * xtx_inv[(reg, reg)]).sqrt();
                    let t = ols[(reg, eq)].abs() / se;
                    if t > 2.0 { det2 += 1; }
                    if t > 3.0 { det3 += 1; }
                }
            }
        }
        println!(
            "seed {seed}: |t|>2 recovery {:.3}, |t|>3 recovery {:.3} (true nonzeros {pos}, |b|<0.2: {small})",
            det2 as f64 / pos as f64, det3 as f64 / pos as f64
        );
    }
}
