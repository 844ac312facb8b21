use std::fs;

use comfort_core::dataset::{filter_pool, ClimateZone, PoolFilter};
use comfort_core::fixtures::{bundled_fixture_dir, diff_csv, expand_structure, validate_fixtures};

#[test]
fn every_bundled_fixture_matches() {
    let report = validate_fixtures(&bundled_fixture_dir()).unwrap();
    assert!(report.passed(), "{report}");
    for name in ["null-vote", "out-of-range", "ashrae-style", "zone-lookup", "pool-structure"] {
        assert!(report.get(name).is_some(), "missing case {name}");
    }
}

#[test]
fn fixtures_stay_small() {
    for entry in fs::read_dir(bundled_fixture_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "csv") {
            let lines = fs::read_to_string(&path).unwrap().lines().count();
            assert!(lines <= 51, "{} has {lines} lines", path.display());
        }
    }
}

#[test]
fn diff_names_row_and_field() {
    let d = diff_csv("a,b\n1,2\n", "a,b\n1,3\n").unwrap();
    assert_eq!(d, vec!["row 1, field b: expected `2`, got `3`"]);
    assert!(diff_csv("a,b\n1,2\n", "a,c\n1,2\n").unwrap()[0].starts_with("header"));
}

#[test]
fn a_broken_expectation_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let src = bundled_fixture_dir();
    for f in ["null_vote.csv", "null_vote.expected.csv"] {
        fs::copy(src.join(f), dir.path().join(f)).unwrap();
    }
    let expected = fs::read_to_string(src.join("null_vote.expected.csv")).unwrap();
    fs::write(dir.path().join("null_vote.expected.csv"), expected.replace("23.8", "23.9")).unwrap();
    fs::write(
        dir.path().join("manifest.toml"),
        "[[load]]\nname = \"null-vote\"\ninput = \"null_vote.csv\"\nmapping = \"canonical\"\n\
         expected = \"null_vote.expected.csv\"\nrows_read = 5\ndropped = []\n",
    )
    .unwrap();
    let report = validate_fixtures(dir.path()).unwrap();
    assert!(!report.passed());
    let m = &report.get("null-vote").unwrap().mismatches;
    assert!(m.iter().any(|s| s.contains("drops")));
    assert!(m.iter().any(|s| s.contains("field indoor_mrt")));
}

#[test]
fn structure_excludes_non_hvac_rows() {
    let mut records = expand_structure(&bundled_fixture_dir().join("hvac_structure.csv")).unwrap();
    comfort_core::dataset::enrich_climate(&mut records, &comfort_core::dataset::CityZoneTable::bundled());
    assert!(records.len() > 13436);
    assert_eq!(filter_pool(&records, &PoolFilter::hvac_in(ClimateZone::C)).len(), 3512);
}
