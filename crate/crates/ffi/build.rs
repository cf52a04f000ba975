use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir =
        PathBuf::from(env::var("CARGO_MANIFEST_DIR").expect("CARGO_MANIFEST_DIR is set by cargo"));
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml"))
        .expect("readable cbindgen.toml");
    // A header failure should not block building the library itself.
    if let Ok(writer) = cbindgen::generate_with_config(&crate_dir, config) {
        writer.write_to_file(crate_dir.join("include/cesm_cad.h"));
    }
}
