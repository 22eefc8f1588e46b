mod common;

use common::{random_tiny, Instance};
use grid_sentinel::encoder::{encode, EncodeOptions};
use grid_sentinel::plan::{coverage_scores, inject_failures, validate};
use grid_sentinel::solver::{assignment_for_plan, solve_enumerative, EnumLimits, SolveStatus};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sizes can be raised for stress runs, e.g. `ORACLE_CASES=200 ORACLE_POINTS=8 ORACLE_S=10`.
fn env_or(name: &str, default: u64) -> u64 {
    std::env::var(name).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}

/// Random tiny instances that encode without precondition errors.
fn instances(seed: u64, count: usize, max_points: usize, max_horizon: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let (tiny, weights) = random_tiny(&mut rng, max_points, max_horizon);
        let inst = Instance::new(tiny.spec(), weights);
        if encode(&inst.spec, &inst.net, &inst.crit, EncodeOptions::for_spec(&inst.spec)).is_ok() {
            out.push(inst);
        }
    }
    out
}

#[test]
fn enumerative_and_smt_agree_on_random_instances() {
    let mut tally = [0usize; 2];
    let cases = instances(
        env_or("ORACLE_SEED", 0x5eed),
        env_or("ORACLE_CASES", 24) as usize,
        env_or("ORACLE_POINTS", 6) as usize,
        env_or("ORACLE_S", 8) as usize,
    );
    for (i, inst) in cases.iter().enumerate() {
        let options = EncodeOptions::for_spec(&inst.spec);
        let e = solve_enumerative(&inst.spec, &inst.net, &inst.crit, options, EnumLimits::default()).unwrap();
        let (smt, plan) = inst.solve_and_decode(options);
        assert_eq!(e.outcome.status, smt.status, "instance {i}: enumerative vs smt\n{:?}", inst.spec);
        match e.outcome.status {
            SolveStatus::Sat => {
                tally[0] += 1;
                let witness = e.witness.unwrap();
                let v = validate(&witness, &inst.spec, &inst.net, &inst.crit).unwrap();
                assert!(v.is_empty(), "instance {i}: witness rejected: {v:?}");
                // the witness also satisfies every clause of the encoding
                let model = encode(&inst.spec, &inst.net, &inst.crit, options).unwrap();
                let a = assignment_for_plan(&model, &witness, &inst.spec, &inst.net, &inst.crit);
                assert_eq!(model.violated(&a), Vec::<usize>::new(), "instance {i}");
                let plan = plan.expect("decoded smt plan");
                assert!(validate(&plan, &inst.spec, &inst.net, &inst.crit).unwrap().is_empty());
            }
            SolveStatus::Unsat => tally[1] += 1,
            other => panic!("instance {i}: unexpected {other:?}"),
        }
    }
    eprintln!("sat {} unsat {}", tally[0], tally[1]);
    assert!(tally[0] > 0 && tally[1] > 0, "harness should exercise both outcomes: {tally:?}");
}

#[test]
fn audit_passes_exactly_on_resilient_points() {
    for inst in instances(0xa0d17, 12, 5, 8) {
        let options = EncodeOptions::for_spec(&inst.spec);
        let e = solve_enumerative(&inst.spec, &inst.net, &inst.crit, options, EnumLimits::default()).unwrap();
        let Some(plan) = e.witness else { continue };
        if inst.spec.k >= plan.n_uavs() {
            continue;
        }
        let report = coverage_scores(&plan, &inst.spec, &inst.crit);
        let audit = inject_failures(&plan, &inst.spec, inst.spec.k).unwrap();
        assert_eq!(audit.passing, report.resilient_points);
        assert!(audit.pass);
    }
}
