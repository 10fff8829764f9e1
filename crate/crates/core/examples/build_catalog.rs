//! Regenerates `data/catalog/*.json` by relaxing the combinatorial seeds.
//!
//! cargo run --release --example build_catalog [out_dir]

use netjacobi::net::{catalog_seed, edge_length_profile, relax_traced, NetName, RelaxOptions};
use std::path::PathBuf;

fn main() {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/catalog"));
    std::fs::create_dir_all(&out).expect("create output directory");
    for name in NetName::ALL {
        let seed = catalog_seed(name).expect("seed assembles");
        let outcome = relax_traced(&seed, RelaxOptions::default()).expect("relaxation converges");
        let mut profile: Vec<String> = edge_length_profile(&outcome.net)
            .iter()
            .map(|d| format!("{d:.3}"))
            .collect();
        profile.dedup();
        println!(
            "{name:18} iters {:6} residual {:.2e} lengths {}",
            outcome.iterations,
            outcome.residual,
            profile.join(" ")
        );
        std::fs::write(out.join(format!("{name}.json")), outcome.net.to_json() + "\n").expect("write catalog file");
    }
}
