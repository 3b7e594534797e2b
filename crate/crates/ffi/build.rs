//! Regenerates `include/peephole_forge.h` from the `#[no_mangle]` surface.
//! The header is written only when its contents change, so clean rebuilds
//! stay byte-stable.

use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").unwrap());
    let header = crate_dir.join("include/peephole_forge.h");

    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        include_guard: Some("PEEPHOLE_FORGE_H".into()),
        documentation: true,
        documentation_style: cbindgen::DocumentationStyle::C99,
        cpp_compat: true,
        header: Some("/* C interface to the peephole pattern toolkit. Generated; do not edit. */".into()),
        enumeration: cbindgen::EnumConfig {
            rename_variants: cbindgen::RenameRule::QualifiedScreamingSnakeCase,
            ..Default::default()
        },
        ..Default::default()
    };

    let bindings = cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("cbindgen failed to read the FFI surface");

    std::fs::create_dir_all(header.parent().unwrap()).unwrap();
    bindings.write_to_file(&header); // no-op when unchanged

    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=build.rs");
}
