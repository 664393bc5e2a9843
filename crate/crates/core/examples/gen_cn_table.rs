//! Regenerates the canonical Colour-Names asset at `assets/colornames.bin`.
//! Run from the crate directory: `cargo run --example gen_cn_table`.

use ladcf::features::ColorNamesTable;

fn main() -> ladcf::Result<()> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("assets");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("colornames.bin");
    let table = ColorNamesTable::generate_prototype_table();
    let mut bytes = Vec::new();
    table.write_binary(&mut bytes)?;
    std::fs::write(&path, &bytes)?;
    println!("wrote {} ({} bytes)", path.display(), bytes.len());
    Ok(())
}
