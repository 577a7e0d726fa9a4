use proptest::prelude::*;
use tdesign::chebdesign::rbar_quadratic;
use tdesign::design::{BSet, Design, DesignInterval, Prior, ReducedParameter};
use tdesign::models::LinearModelPair;
use tdesign::moments::{info_matrix, schur_complement, schur_trace_form};
use tdesign::optimizer::{equivalence_gap, BayesLinear, OptimizerConfig};
use tdesign::robust::{bayes_value, optimize_bayes, optimize_maximin, AtomLocation, PriorMomentMatrix};
use tdesign::tcrit::{least_squares_t, r_value_linear, t_efficiency_linear, t_value_linear};

fn unit() -> DesignInterval {
    DesignInterval::new(-1.0, 1.0).unwrap()
}

/// Sorted design on `[-r, r]` with at least `min_points` points, built from
/// raw draws.
fn design_from(raw: &[(f64, f64)], r: f64) -> Option<Design> {
    let mut pts: Vec<(f64, f64)> = raw.iter().map(|&(x, w)| (r * x, w)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-3 * r);
    let total: f64 = pts.iter().map(|p| p.1).sum();
    Design::new(pts.iter().map(|p| p.0).collect(), pts.iter().map(|p| p.1 / total).collect()).ok()
}

fn symmetric_prior(raw: &[(f64, f64)], dim: usize) -> Prior {
    let total: f64 = 2.0 * raw.iter().map(|p| p.1).sum::<f64>();
    let mut atoms = Vec::new();
    for (i, &(b, m)) in raw.iter().enumerate() {
        let v: Vec<f64> = (0..dim).map(|j| b * (1.0 + 0.37 * (i + j) as f64)).collect();
        atoms.push((ReducedParameter::new(v.clone()).unwrap(), m / total));
        atoms.push((ReducedParameter::new(v.iter().map(|x| -x).collect()).unwrap(), m / total));
    }
    Prior::new(atoms).unwrap()
}

fn raw_design(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, 0.05f64..1.0), n)
}

fn raw_prior() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.05f64..3.0, 0.1f64..1.0), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schur_form_equals_least_squares(raw in raw_design(6..10), m in 2usize..5, s in 1usize..3, b in -3.0f64..3.0) {
        let s = s.min(m);
        let pair = LinearModelPair::polynomial(m - s, m, &unit()).unwrap();
        let Some(design) = design_from(&raw, 1.0) else { return Ok(()) };
        prop_assume!(design.len() > m);
        let b = ReducedParameter::new(vec![b; s - 1]).unwrap();
        let a = t_value_linear(&design, &pair, &b).unwrap().value;
        let c = least_squares_t(&design, &pair, &b).unwrap().value;
        prop_assert!((a - c).abs() <= 1e-9 * c.abs().max(1e-6), "{a} vs {c}");
    }

    #[test]
    fn bayes_criterion_is_a_trace_form(raw in raw_design(5..9), pri in raw_prior(), m in 2usize..5) {
        let pair = LinearModelPair::polynomial(m - 2, m, &unit()).unwrap();
        let Some(design) = design_from(&raw, 1.0) else { return Ok(()) };
        prop_assume!(design.len() > m);
        let prior = symmetric_prior(&pri, 1);
        let direct: f64 = prior.atoms().iter().map(|(b, p)| p * least_squares_t(&design, &pair, b).unwrap().value).sum();
        let l = PriorMomentMatrix::bayes(&prior).unwrap();
        let trace = schur_trace_form(&schur_complement(&info_matrix(&design, &pair)), l.matrix()).unwrap();
        prop_assert!((direct - trace).abs() <= 1e-9 * direct.max(1e-12));
    }

    #[test]
    fn bayes_criterion_is_concave(xa in raw_design(4..7), xb in raw_design(4..7), pri in raw_prior(), alpha in 0.0f64..1.0) {
        let pair = LinearModelPair::polynomial(0, 2, &unit()).unwrap();
        let (Some(a), Some(b)) = (design_from(&xa, 1.0), design_from(&xb, 1.0)) else { return Ok(()) };
        let prior = symmetric_prior(&pri, 1);
        let mix = a.mix(&b, alpha).unwrap();
        let (va, vb, vm) = (
            bayes_value(&a, &pair, &prior).unwrap(),
            bayes_value(&b, &pair, &prior).unwrap(),
            bayes_value(&mix, &pair, &prior).unwrap(),
        );
        prop_assert!(vm >= alpha * va + (1.0 - alpha) * vb - 1e-12);
    }

    #[test]
    fn bayes_value_ignores_atom_order(raw in raw_design(4..7), pri in raw_prior(), shift in 0usize..6) {
        let pair = LinearModelPair::polynomial(0, 2, &unit()).unwrap();
        let Some(design) = design_from(&raw, 1.0) else { return Ok(()) };
        let prior = symmetric_prior(&pri, 1);
        let mut atoms = prior.atoms().to_vec();
        let k = shift % atoms.len();
        atoms.rotate_left(k);
        atoms.reverse();
        let permuted = Prior::new(atoms).unwrap();
        prop_assert_eq!(
            bayes_value(&design, &pair, &prior).unwrap().to_bits(),
            bayes_value(&design, &pair, &permuted).unwrap().to_bits()
        );
    }

    #[test]
    fn efficiency_is_scale_invariant(raw in raw_design(4..7), m in 2usize..5, b in -3.0f64..3.0, r in 0.2f64..5.0) {
        let Some(design) = design_from(&raw, 1.0) else { return Ok(()) };
        prop_assume!(design.len() > m - 1);
        let Some(scaled) = design_from(&raw, r) else { return Ok(()) };
        prop_assume!(scaled.len() == design.len());
        let wide = DesignInterval::symmetric(r).unwrap();
        let pair = LinearModelPair::polynomial(m - 2, m, &unit()).unwrap();
        let wide_pair = LinearModelPair::polynomial(m - 2, m, &wide).unwrap();
        let e = t_efficiency_linear(&design, &pair, &ReducedParameter::scalar(b), &unit()).unwrap();
        let f = t_efficiency_linear(&scaled, &wide_pair, &ReducedParameter::scalar(r * b), &wide).unwrap();
        prop_assert!((e - f).abs() <= 1e-7, "{e} vs {f}");
    }
}

#[test]
fn quadratic_rbar_matches_general_approximation() {
    let pair = LinearModelPair::polynomial(0, 2, &unit()).unwrap();
    for b in [-5.0, -2.0, -1.3, -0.5, 0.0, 0.2, 1.0, 2.0, 2.5, 10.0] {
        let closed = rbar_quadratic(b, 1.0);
        let general = r_value_linear(&pair, &ReducedParameter::scalar(b), &unit()).unwrap().value;
        assert!((closed - general).abs() <= 1e-9 * closed, "b={b}: {closed} vs {general}");
    }
}

#[test]
fn bayes_optima_satisfy_the_equivalence_conditions() {
    let cases: [&[(f64, f64)]; 4] = [&[(0.3, 1.0)], &[(1.5, 1.0)], &[(0.2, 1.0), (2.0, 0.5)], &[(0.7, 0.3), (1.1, 0.6), (2.5, 0.1)]];
    for (m, raw) in [(2usize, cases[0]), (3, cases[1]), (2, cases[2]), (4, cases[3])] {
        let pair = LinearModelPair::polynomial(m - 2, m, &unit()).unwrap();
        let prior = symmetric_prior(raw, 1);
        let design = optimize_bayes(&pair, &prior, &unit(), &OptimizerConfig::default()).unwrap();
        let gap = equivalence_gap(&design, &BayesLinear { pair, prior }, &unit(), 2001).unwrap();
        assert!(gap < 1e-6, "m={m}: gap {gap}");
    }
}

#[test]
fn maximin_value_equals_the_least_favourable_bayes_value() {
    let pair = LinearModelPair::polynomial(0, 2, &unit()).unwrap();
    for d in [0.25, 2.0, 8.0] {
        let cert = optimize_maximin(&pair, &BSet::interval(d).unwrap(), &unit(), &OptimizerConfig::default()).unwrap();
        let mut atoms = Vec::new();
        let mut rbars = Vec::new();
        for a in &cert.least_favorable {
            let AtomLocation::Finite(b) = &a.location else { panic!("finite ℬ has no limit atom") };
            rbars.push(r_value_linear(&pair, b, &unit()).unwrap().value);
            atoms.push((b.clone(), a.mass));
        }
        let standardized: f64 = atoms
            .iter()
            .zip(&rbars)
            .map(|((b, w), r)| w * t_value_linear(&cert.design, &pair, b).unwrap().value / r)
            .sum();
        assert!((standardized - cert.value).abs() <= 1e-8, "d={d}: {standardized} vs {}", cert.value);
        let l = PriorMomentMatrix::standardized(&atoms, &rbars).unwrap();
        let block = schur_complement(&info_matrix(&cert.design, &pair));
        let trace = schur_trace_form(&block, l.matrix()).unwrap();
        assert!((trace - cert.value).abs() <= 1e-8);
    }
}
