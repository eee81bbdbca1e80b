//! Regenerates the bundled sample corpora under `data/`.
//!
//! cargo run -p srp --example make_sample

use std::fs;
use std::path::Path;

use srp::conllu::serialize_corpus;
use srp::synth::{generate, SynthConfig};

fn main() -> std::io::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    fs::create_dir_all(&data)?;

    let sample = generate(50, 2018, &SynthConfig::default());
    fs::write(data.join("sample.conllu"), serialize_corpus(&sample))?;

    // Out-of-domain text: some sentences use nouns absent from the sample.
    let external = generate(200, 2019, &SynthConfig { rare_noun_rate: 0.1 });
    fs::write(data.join("external.conllu"), serialize_corpus(&external))?;
    Ok(())
}
