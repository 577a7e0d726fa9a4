use tdesign::chebdesign::bayes_quadratic_uniform_eff;
use tdesign::design::{Design, DesignInterval};
use tdesign::powersim::*;

fn b1() -> RealizedDesign {
    efficient_round(&bayes_quadratic_uniform_eff(1.0).unwrap(), 60).unwrap()
}

fn b2() -> RealizedDesign {
    efficient_round(&bayes_quadratic_uniform_eff(3.0).unwrap(), 60).unwrap()
}

fn uniform() -> RealizedDesign {
    let grid = DesignInterval::new(-1.0, 1.0).unwrap().grid(10);
    efficient_round(&Design::uniform(grid).unwrap(), 60).unwrap()
}

// reference values from scipy.stats.ncf.sf with critical value f.ppf(0.95, 2, 57)
const REFERENCE: [(&str, f64, f64); 8] = [
    ("B1", 0.5, 0.8557701738235695),
    ("B1", 1.0, 0.9999925459696263),
    ("B1", 2.0, 1.0),
    ("B2", 0.5, 0.7054648002921853),
    ("B2", 1.0, 0.9994544320913991),
    ("U", 0.5, 0.6253266827586524),
    ("U", 1.0, 0.9975484688534936),
    ("U", 2.0, 0.9999999999999988),
];

fn design(id: &str) -> RealizedDesign {
    match id {
        "B1" => b1(),
        "B2" => b2(),
        _ => uniform(),
    }
}

#[test]
fn rounding_of_the_study_designs() {
    assert_eq!(b1().counts(), &[18, 24, 18]);
    assert_eq!(b2().counts(), &[29, 2, 29]);
    assert_eq!(uniform().counts(), &[6; 10]);
}

#[test]
fn critical_value_matches_reference() {
    let test = FTest::new(&b1().points(), 0.05).unwrap();
    assert!((test.critical_value() - 3.1588427192606465).abs() < 1e-10);
}

#[test]
fn noncentrality_matches_reference() {
    let lambda = noncentrality(&b1(), TruthModel::Proportional, 0.5, 0.5);
    assert!((lambda - 11.7).abs() < 1e-12);
    let lambda = noncentrality(&uniform(), TruthModel::Proportional, 0.5, 0.5);
    assert!((lambda - 6.918381344307274).abs() < 1e-12);
}

#[test]
fn oracle_matches_reference() {
    for (id, v, p) in REFERENCE {
        let got = noncentral_power_oracle(&design(id), TruthModel::Proportional, v, 0.5, 0.05).unwrap();
        assert!((got - p).abs() < 1e-9, "{id} at {v}: {got} vs {p}");
    }
}

#[test]
fn level_is_controlled() {
    let mut spec = SimulationSpec::new(TruthModel::Proportional, vec![0.0]);
    spec.replications = 20_000;
    spec.seed = 3;
    for r in [b1(), uniform()] {
        let c = simulate_power(&spec, &r).unwrap();
        let p = c.points[0];
        assert!((p.power - 0.05).abs() <= 3.0 * (0.05f64 * 0.95 / 20_000.0).sqrt(), "{}", p.power);
    }
}

#[test]
fn simulation_agrees_with_oracle() {
    // the fixed linear term makes ϑ₂ = 0 an alternative as well
    let mut spec = SimulationSpec::new(TruthModel::FixedLinear, vec![0.0, 0.1, 0.25, 0.4]);
    spec.replications = 20_000;
    spec.seed = 11;
    let r = b2();
    let c = simulate_power(&spec, &r).unwrap();
    for p in &c.points {
        let exact = noncentral_power_oracle(&r, spec.truth, p.vartheta2, spec.sigma2, spec.level).unwrap();
        let se = (exact * (1.0 - exact) / 20_000.0).sqrt();
        assert!((p.power - exact).abs() <= 3.5 * se, "ϑ₂={}: {} vs {exact}", p.vartheta2, p.power);
    }
}

#[test]
fn contamination_is_flagged_and_deterministic() {
    let mut spec = SimulationSpec::new(TruthModel::Proportional, vec![0.0, 0.5]);
    spec.replications = 2_000;
    spec.contamination = Some(Contamination::default());
    let a = simulate_power(&spec, &b1()).unwrap();
    assert!(a.contaminated);
    assert_eq!(a, simulate_power(&spec, &b1()).unwrap());
    spec.seed = 1;
    assert_ne!(a, simulate_power(&spec, &b1()).unwrap());
}

#[test]
fn low_replication_counts_are_flagged() {
    let mut spec = SimulationSpec::new(TruthModel::Proportional, vec![0.0]);
    spec.replications = 200;
    assert!(simulate_power(&spec, &b1()).unwrap().low_replication_warning);
}

#[test]
fn invalid_specs_are_rejected() {
    let mut spec = SimulationSpec::new(TruthModel::Proportional, vec![0.0]);
    spec.level = 1.5;
    assert!(simulate_power(&spec, &b1()).is_err());
    assert!(FTest::new(&[0.0, 0.0, 1.0, 1.0], 0.05).is_err());
}
