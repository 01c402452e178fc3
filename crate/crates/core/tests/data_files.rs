use std::path::{Path, PathBuf};

use geocond::backtest::{load_prices, synthetic_prices};
use geocond::expectation::{bundled_models, AnyModel};
use geocond::GeoError;

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

#[test]
fn bundled_prices_match_generator() {
    let file = load_prices(data().join("synthetic_prices.csv")).unwrap();
    let fresh = synthetic_prices(2, 1000, 2024).unwrap();
    assert_eq!(file.dates(), fresh.dates());
    assert_eq!(file.tickers(), fresh.tickers());
    assert_eq!(file.prices(), fresh.prices());
}

#[test]
fn bundled_model_files_match_builders() {
    for (name, m) in bundled_models() {
        let file = AnyModel::load(&data().join("models").join(format!("{name}.json"))).unwrap();
        assert_eq!(file.to_file_data(), m.to_file_data(), "{name}");
    }
}

#[test]
fn tampered_model_is_rejected() {
    let err = AnyModel::load(&data().join("models/tampered-nonrefining.json")).unwrap_err();
    assert!(matches!(err, GeoError::InvalidModel(_)), "{err}");
}
