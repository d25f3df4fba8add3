fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    let header = std::path::Path::new(&crate_dir).join("include").join("gfa.h");
    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        include_guard: Some("GFA_H".into()),
        cpp_compat: true,
        documentation: true,
        // GfaStatus_OK etc. — bare variant names would collide in C.
        enumeration: cbindgen::EnumConfig {
            prefix_with_name: true,
            rename_variants: cbindgen::RenameRule::ScreamingSnakeCase,
            ..Default::default()
        },
        ..Default::default()
    };
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("cbindgen failed")
        .write_to_file(header);
    println!("cargo:rerun-if-changed=src/lib.rs");
}
