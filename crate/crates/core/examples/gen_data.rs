//! Regenerates the bundled data files under `data/`.

use std::path::Path;

use geocond::backtest::synthetic_prices;
use geocond::expectation::{bundled_models, AnyModel, Partition};

pub const PRICE_SEED: u64 = 2024;
pub const PRICE_DAYS: usize = 1000;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let panel = synthetic_prices(2, PRICE_DAYS, PRICE_SEED)?;
    panel.write_csv(std::fs::File::create(root.join("synthetic_prices.csv"))?)?;
    for (name, m) in bundled_models() {
        m.save(&root.join("models").join(format!("{name}.json")))?;
    }
    let AnyModel::Spd(spd8) = bundled_models().remove(2).1 else {
        unreachable!()
    };
    let mut tampered = AnyModel::Spd(spd8).to_file_data();
    tampered.partitions[3] = Partition(vec![vec![0, 4], vec![1, 5], vec![2, 6], vec![3, 7]]);
    std::fs::write(
        root.join("models/tampered-nonrefining.json"),
        serde_json::to_string_pretty(&tampered)?,
    )?;
    Ok(())
}
