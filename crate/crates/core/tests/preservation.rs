use spincorr::dynamics::SpinSystemJson;
use spincorr::harness::fixtures::{self, FixtureKind, FIXTURES};
use spincorr::harness::{random_single_site_births, verify_preservation, ExperimentSpec, InitialFamily, Summary};
use spincorr::measures::Property;
use spincorr::Parallelism;

fn assert_clean(spec: &ExperimentSpec, label: &str) {
    let out = verify_preservation(spec, Parallelism::Parallel).unwrap();
    assert!(out.hypotheses_hold, "{label}: hypotheses {:?}", out.hypotheses);
    assert!(!out.cells.is_empty(), "{label}: nothing evolved");
    assert_eq!(out.violation_count(), 0, "{label}: {:?}", out.summary);
    assert_eq!(out.summary, Summary::AllHold);
}

#[test]
fn bundled_experiments_have_no_violations() {
    for f in FIXTURES.iter().filter(|f| f.kind == FixtureKind::Experiment) {
        assert_clean(&fixtures::experiment(f.name).unwrap(), f.name);
    }
}

#[test]
fn single_site_births_keep_dca() {
    for seed in 0..6 {
        let (rates, _) = random_single_site_births(seed, 3).unwrap();
        let spec = ExperimentSpec {
            system: SpinSystemJson::from_rates(&rates),
            initial: InitialFamily::RandomLattice,
            property: Property::Dca,
            times: vec![0.25, 1.0, 4.0],
            seed,
            count: 4,
            tilt_budget: 0,
        };
        assert_clean(&spec, &format!("seed {seed}"));
    }
}

#[test]
fn outcomes_do_not_depend_on_parallelism() {
    let spec = fixtures::experiment("experiment_contact_associated").unwrap();
    let a = serde_json::to_string(&verify_preservation(&spec, Parallelism::Parallel).unwrap()).unwrap();
    let b = serde_json::to_string(&verify_preservation(&spec, Parallelism::Sequential).unwrap()).unwrap();
    let c = serde_json::to_string(&verify_preservation(&spec, Parallelism::Parallel).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn non_attractive_system_loses_association() {
    let spec = ExperimentSpec {
        system: SpinSystemJson::from_rates(&fixtures::rates("nonattractive2").unwrap()),
        initial: InitialFamily::Product,
        property: Property::Associated,
        times: vec![0.05, 0.5],
        seed: 1,
        count: 8,
        tilt_budget: 0,
    };
    let out = verify_preservation(&spec, Parallelism::Parallel).unwrap();
    assert!(!out.hypotheses_hold);
    assert!(out.violation_count() > 0);
    assert!(!out.is_inconsistent());
    let text = serde_json::to_string(&out).unwrap();
    let back: spincorr::harness::ExperimentOutcome = serde_json::from_str(&text).unwrap();
    assert_eq!(back, out);
}
