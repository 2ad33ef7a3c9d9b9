//! Measures the constant ledger (without solver calibration) and prints it as JSON.

use wfde::lab::{measure_ledger, LedgerOptions};
use wfde::params::Params;

fn main() -> wfde::Result<()> {
    let p = Params::new(3, 1.0, 0.0, 0.25, 2.0)?;
    let ledger = measure_ledger(&p, &LedgerOptions::default())?;
    println!("{}", ledger.to_json()?);
    let bad = ledger.invalid_entries();
    if !bad.is_empty() {
        println!("non-positive entries: {bad:?}");
    }
    Ok(())
}
