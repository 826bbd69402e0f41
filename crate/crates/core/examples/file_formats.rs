//! Round trip through the binary matrix format and CSV, and the error
//! reported for a damaged file.

use tsenor::io::{decode, encode, load_matrix, parse_csv, read_mask, write_mask, write_matrix, TnmDtype, HEADER_LEN};
use tsenor::{assemble_mask, solve_mask, DykstraConfig, RoundingConfig, SparsityPattern};

fn main() -> tsenor::Result<()> {
    let dir = std::env::temp_dir().join(format!("tsenor-formats-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| tsenor::Error::Io { path: dir.clone(), source: e })?;

    let w = parse_csv("0.88,0.01,0.84,0.27\n0.01,0.71,0.75,0.53\n0.82,0.78,0.15,0.25\n0.29,0.50,0.26,0.95\n")?;
    let weights_path = dir.join("weights.tnm");
    write_matrix(&weights_path, &w, TnmDtype::F32)?;
    let bytes = std::fs::read(&weights_path).map_err(|e| tsenor::Error::Io { path: weights_path.clone(), source: e })?;
    println!("f32 file: {} bytes ({HEADER_LEN} header + 16 x 4)", bytes.len());
    let back = load_matrix(&weights_path)?;
    println!("max f32 round-trip error {:.1e}", back.values().iter().zip(w.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));

    let pattern = SparsityPattern::new(2, 4)?;
    let (batch, sol) = solve_mask(&w, pattern, &DykstraConfig::default(), &RoundingConfig::default())?;
    let mask = assemble_mask(&sol.mask, batch.origin(), 4, 4)?;
    let mask_path = dir.join("mask.tnm");
    write_mask(&mask_path, &mask)?;
    println!("mask file: {} bytes, identical after reading: {}", HEADER_LEN + 16, read_mask(&mask_path)? == mask);

    let damaged = encode(&mask, TnmDtype::Mask)?;
    match decode(&damaged[..damaged.len() - 1], &mask_path) {
        Ok(_) => println!("damaged file unexpectedly decoded"),
        Err(e) => println!("damaged file: {e}"),
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}
