use grid_sentinel::ingest::{parse_scenario, ScenarioSpec};
use grid_sentinel::powergrid::{analyze, post_outage_flows, AnalysisConfig};
use nalgebra::{DMatrix, DVector};

/// Relative tolerance of LODF predictions against outage re-solves, with
/// 1 MW as the floor of the reference magnitude.
const LODF_REL_TOL: f64 = 1e-6;
/// Relative tolerance of the PI vector against brute-force evaluation.
const PI_REL_TOL: f64 = 1e-9;

fn ieee14() -> ScenarioSpec {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/ieee14.txt");
    parse_scenario(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Straightforward DC flow over the lines kept by `keep`. Returns None when
/// the reduced susceptance matrix is singular (islanded grid).
fn dc_flows(spec: &ScenarioSpec, keep: impl Fn(usize) -> bool) -> Option<Vec<f64>> {
    let n = spec.n_buses;
    let mut b = DMatrix::<f64>::zeros(n, n);
    for (l, line) in spec.lines.iter().enumerate() {
        if !keep(l) {
            continue;
        }
        let (i, j, y) = (line.from.index(), line.to.index(), 1.0 / line.reactance);
        b[(i, i)] += y;
        b[(j, j)] += y;
        b[(i, j)] -= y;
        b[(j, i)] -= y;
    }
    let inj = spec.net_injections();
    // slack is bus 1; drop its row and column
    let reduced = b.view((1, 1), (n - 1, n - 1)).into_owned();
    let rhs = DVector::from_iterator(n - 1, inj[1..].iter().copied());
    let lu = reduced.lu();
    if lu.determinant().abs() < 1e-12 {
        return None;
    }
    let theta_r = lu.solve(&rhs)?;
    let mut theta = vec![0.0; n];
    theta[1..].copy_from_slice(theta_r.as_slice());
    Some(
        spec.lines
            .iter()
            .enumerate()
            .map(
                |(l, line)| {
                    if keep(l) {
                        (theta[line.from.index()] - theta[line.to.index()]) / line.reactance
                    } else {
                        0.0
                    }
                },
            )
            .collect(),
    )
}

#[test]
fn base_flow_matches_reference_solver() {
    let spec = ieee14();
    let a = analyze(&spec, AnalysisConfig::default()).unwrap();
    let reference = dc_flows(&spec, |_| true).unwrap();
    for (l, (&got, &want)) in a.base.flows.iter().zip(&reference).enumerate() {
        assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "line {}: {got} vs {want}", l + 1);
    }
}

#[test]
fn lodf_predictions_match_outage_resolves() {
    let spec = ieee14();
    let a = analyze(&spec, AnalysisConfig::default()).unwrap();
    assert_eq!(a.lodf.n_lines(), 20);
    let mut checked = 0;
    for outaged in 0..spec.n_lines {
        let fresh = dc_flows(&spec, |l| l != outaged);
        let predicted = post_outage_flows(&a.lodf, &a.base, outaged);
        match (predicted, fresh) {
            (Some(pred), Some(fresh)) => {
                for m in (0..spec.n_lines).filter(|&m| m != outaged) {
                    let err = (pred[m] - fresh[m]).abs() / fresh[m].abs().max(1.0);
                    assert!(
                        err <= LODF_REL_TOL,
                        "monitored {} outaged {}: {} vs {}",
                        m + 1,
                        outaged + 1,
                        pred[m],
                        fresh[m]
                    );
                    checked += 1;
                }
            }
            (None, None) => assert!(a.lodf.islanding.contains(&outaged)),
            (p, f) => panic!("outage {}: islanding disagreement {:?} {:?}", outaged + 1, p.is_some(), f.is_some()),
        }
    }
    assert_eq!(checked, 19 * (20 - a.lodf.islanding.len()));
}

#[test]
fn pi_matches_brute_force() {
    let spec = ieee14();
    for exponent in [1, 2] {
        let mut cfg = AnalysisConfig::default();
        cfg.pi.exponent_n = exponent;
        let a = analyze(&spec, cfg).unwrap();
        let base = dc_flows(&spec, |_| true).unwrap();
        let caps: Vec<f64> = base.iter().map(|f| (1.5 * f.abs()).max(1.0)).collect();
        let mut brute: Vec<Option<f64>> = (0..spec.n_lines)
            .map(|o| {
                dc_flows(&spec, |l| l != o).map(|post| {
                    (0..spec.n_lines).filter(|&l| l != o).map(|l| (post[l] / caps[l]).powi(2 * exponent as i32)).sum()
                })
            })
            .collect();
        let max_finite = brute.iter().flatten().copied().fold(0.0, f64::max);
        for v in brute.iter_mut() {
            v.get_or_insert(10.0 * max_finite);
        }
        for (l, (got, want)) in a.pi.pi.iter().zip(brute).enumerate() {
            let want = want.unwrap();
            assert!((got - want).abs() <= PI_REL_TOL * want.abs().max(1.0), "line {}: {got} vs {want}", l + 1);
        }
    }
}

#[test]
fn bridge_line_is_islanding() {
    let spec = ieee14();
    let a = analyze(&spec, AnalysisConfig::default()).unwrap();
    // bus 8 hangs off bus 7 by a single line
    let bridge = spec.lines.iter().position(|l| l.from.0.min(l.to.0) == 7 && l.from.0.max(l.to.0) == 8).unwrap();
    assert_eq!(a.pi.islanding.iter().copied().collect::<Vec<_>>(), vec![bridge]);
}
