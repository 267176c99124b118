use std::path::PathBuf;

use nlts::io::to_json;
use nlts::monitor::detect_shifts_detailed;
use nlts::testkit::{simulate_series, trade_like_theta};
use nlts::wedge::build_wedge;
use nlts::{LtsOptions, ModelSpec};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

/// Compares with the frozen file; `NLTS_BLESS=1` rewrites it.
fn check_golden(name: &str, actual: &str) {
    let path = data(name);
    if std::env::var_os("NLTS_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e} (run with NLTS_BLESS=1 to create it)", path.display()));
    assert!(expected == actual, "{name} differs from the golden file");
}

#[test]
fn wedge_svg_golden() {
    let positions: Vec<usize> = (4..=8).collect();
    let rows: Vec<Vec<f64>> = positions
        .iter()
        .map(|&p| {
            (1..=10)
                .map(|t| {
                    let d = t as f64 - p as f64;
                    if d < 0.0 { -0.8 * d * d } else { 0.3 * d }
                })
                .collect()
        })
        .collect();
    let w = build_wedge(&positions, &rows).unwrap();
    check_golden("wedge_5x10.svg", &w.to_svg());
    check_golden("wedge_5x10.tsv", &w.to_tsv());
}

#[test]
fn report_json_golden() {
    let spec = ModelSpec::new(1, 2, 1);
    let y = simulate_series(&spec, &trade_like_theta(), 48, 6.0, 3);
    let opts = LtsOptions {
        trials: 40,
        seed: 11,
        ..LtsOptions::default()
    };
    let d = detect_shifts_detailed("frozen", y.values(), &spec, &opts, 2).unwrap();
    check_golden("report_frozen.json", &to_json(&d.report).unwrap());
}
