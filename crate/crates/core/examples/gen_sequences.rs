//! Regenerates the shipped `sequences/` data directory. Not part of the
//! library; run from the workspace root.

use std::f64::consts::PI;

use ucpg::generate_sequence;
use ucpg::seqfile::{save_sequence, two_block_construction, SequenceFile, TwoBlockSpec};

const GENOV_TABLE: &str =
    "block phases from G. T. Genov, D. Schraft, T. Halfmann, N. V. Vitanov, \
     Phys. Rev. Lett. 113, 043001 (2014), Table I";
const TOROSOV_CONSTRUCTION: &str =
    "two-block composite phase gate after B. T. Torosov and N. V. Vitanov: two identical \
     universal composite pi-pulse blocks, the second offset by a constant phase that sets \
     the gate phase; offset-to-phase mapping read off the ideal-limit propagator";

fn main() {
    let dir = std::path::Path::new("sequences");
    std::fs::create_dir_all(dir).unwrap();

    for (n, phi, name) in [
        (4usize, PI / 2.0, "ucpg-n4-phi90.json"),
        (8, PI / 2.0, "ucpg-n8-phi90.json"),
        (12, PI / 4.0, "ucpg-n12-phi45.json"),
        (20, PI / 4.0, "ucpg-n20-phi45.json"),
    ] {
        let seq = generate_sequence(n, phi).unwrap();
        let file = SequenceFile::from_sequence(
            &seq,
            PI,
            "generated by the analytic even-N phase law (family ucpg-analytic)",
        );
        save_sequence(dir.join(name), &file).unwrap();
        println!("wrote {name}");
    }

    let u5a = vec![0.0, 5.0 * PI / 6.0, PI / 3.0, 5.0 * PI / 6.0, 0.0];
    let u7a: Vec<f64> = [0.0f64, 11.0, 10.0, 17.0, 10.0, 11.0, 0.0]
        .iter()
        .map(|k| k * PI / 12.0)
        .collect();

    for (block, label, block_name, block_desc) in [
        (
            u5a,
            "uph10a",
            "U5a",
            "U5a = (0, 5, 2, 5, 0)*pi/6, first-order universal composite pi pulse",
        ),
        (
            u7a,
            "uph14a",
            "U7a",
            "U7a = (0, 11, 10, 17, 10, 11, 0)*pi/12, second-order universal composite pi pulse",
        ),
    ] {
        let offset = PI / 4.0; // realized gate phase is twice the offset
        let seq = two_block_construction(&TwoBlockSpec {
            block_phases: block.clone(),
            offset,
        })
        .unwrap();
        let mut file = SequenceFile::from_sequence(
            &seq,
            PI,
            &format!(
                "{TOROSOV_CONSTRUCTION}; {GENOV_TABLE}; {block_desc}. Reconstructed here as \
                 {block_name}+{block_name} with offset pi/4 (target phase pi/2); the block \
                 phases were cross-checked against the first-order universal-inversion \
                 cancellation conditions, which they satisfy exactly."
            ),
        );
        file.family = label.to_string();
        file.two_block = Some(ucpg::seqfile::TwoBlockFileSpec {
            block_phases_rad: block,
            offset_rad: offset,
        });
        let name = format!("{label}-phi90.json");
        save_sequence(dir.join(&name), &file).unwrap();
        println!("wrote {name}");
    }

    for (n, label, blocks) in [(6usize, "uph6a", "two 3-pulse (U3)"), (26, "uph26a", "two 13-pulse (U13)")] {
        let file = SequenceFile {
            schema_version: 1,
            family: label.to_string(),
            n_pulses: n,
            phases_deg: None,
            phases_rad: Some(vec![]),
            target_phase: PI / 2.0,
            nominal_area: PI,
            provenance: format!(
                "PLACEHOLDER - no phase data. {label} is a {n}-pulse phase gate built from \
                 {blocks} universal composite pi blocks with a constant offset that sets the \
                 gate phase. To supply real data: transcribe the block phases from the \
                 published universal composite-pulse tables (Genov et al., Phys. Rev. Lett. \
                 113, 043001 (2014) and follow-up work; Torosov-Vitanov composite phase-gate \
                 tables), fill two_block.block_phases_rad and two_block.offset_rad, \
                 materialize phases_rad with the two-block construction, and set placeholder \
                 to false."
            ),
            placeholder: true,
            two_block: None,
        };
        let name = format!("{label}-phi90.json");
        save_sequence(dir.join(&name), &file).unwrap();
        println!("wrote {name}");
    }
}
