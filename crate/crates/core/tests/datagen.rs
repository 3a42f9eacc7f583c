use hgr_core::baselines::{rdc, RdcConfig};
use hgr_core::datagen::{generate, oracle_correlation, Relation, SyntheticSpec};

fn mean_oracle(rel: Relation, sigma: f64) -> f64 {
    (0..10)
        .map(|seed| {
            let spec = SyntheticSpec::new(rel, 500, sigma, seed).unwrap();
            let (a, b) = generate(&spec).unwrap();
            oracle_correlation(&spec, &a, &b).unwrap()
        })
        .sum::<f64>()
        / 10.0
}

#[test]
fn oracle_decreases_with_noise() {
    for rel in Relation::ALL {
        let low = mean_oracle(rel, 0.1);
        let high = mean_oracle(rel, 0.5);
        assert!(high < low, "{rel}: {high} !< {low}");
    }
}

#[test]
fn quadratic_oracle_golden_value() {
    let spec = SyntheticSpec::parse("quadratic:n=1000:sigma=0.1:seed=0").unwrap();
    let (a, b) = generate(&spec).unwrap();
    let r = oracle_correlation(&spec, &a, &b).unwrap();
    assert!((r - GOLDEN).abs() <= 1e-12, "{r}");
}

const GOLDEN: f64 = 0.9453851154620875;

#[test]
fn rdc_is_invariant_to_monotone_maps() {
    let spec = SyntheticSpec::new(Relation::Cubic, 300, 0.2, 4).unwrap();
    let (a, b) = generate(&spec).unwrap();
    let cfg = RdcConfig::with_seed(21);
    let base = rdc(&a, &b, &cfg).unwrap();
    let warped = a.map(|x| (3.0 * x).exp() + x).unwrap();
    assert_eq!(base.to_bits(), rdc(&warped, &b, &cfg).unwrap().to_bits());
    assert_eq!(base.to_bits(), rdc(&a, &b, &cfg).unwrap().to_bits());
    assert!((0.0..=1.0).contains(&base));
}

#[test]
fn rdc_varies_with_seed() {
    let spec = SyntheticSpec::new(Relation::Quadratic, 300, 0.3, 4).unwrap();
    let (a, b) = generate(&spec).unwrap();
    let values: Vec<f64> = (0..30)
        .map(|s| rdc(&a, &b, &RdcConfig::with_seed(s)).unwrap())
        .collect();
    let (_, std) = hgr_core::stats::mean_std(&values);
    assert!(std > 0.0);
}
