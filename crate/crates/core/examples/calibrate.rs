//! Regenerates `src/lts/scale_table.rs`.

use nlts::lts::scale::{
    calibrate_small_sample_factor, CALIBRATION_FRACTIONS, CALIBRATION_LENGTHS, CALIBRATION_PARAMS,
    CALIBRATION_REPS, CALIBRATION_SEED,
};

fn main() {
    println!("// generated by examples/calibrate.rs");
    println!("[");
    for len in CALIBRATION_LENGTHS {
        println!("    // T = {len}");
        println!("    [");
        for p in CALIBRATION_PARAMS {
            let reps = if p == 1 { CALIBRATION_REPS.0 } else { CALIBRATION_REPS.1 };
            let row: Vec<String> = CALIBRATION_FRACTIONS
                .iter()
                .map(|&f| {
                    let v = calibrate_small_sample_factor(len, p, f, reps, CALIBRATION_SEED);
                    if v.is_finite() { format!("{v:.4}") } else { "f64::NAN".into() }
                })
                .collect();
            println!("        [{}], // p = {p}", row.join(", "));
        }
        println!("    ],");
    }
    println!("]");
}
