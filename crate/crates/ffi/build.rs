use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        pragma_once: true,
        include_version: true,
        cpp_compat: true,
        documentation: true,
        header: Some(
            "/* C interface for the magnus series toolkit. Handles are opaque;\n \
             * functions return MgStatus and set a thread-local message readable\n \
             * via mg_last_error(). */"
                .into(),
        ),
        ..Default::default()
    };
    let header = crate_dir.join("include").join("magnus.h");
    std::fs::create_dir_all(header.parent().unwrap()).unwrap();
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("cbindgen header generation")
        .write_to_file(&header);
    println!("cargo:rerun-if-changed=src/lib.rs");
}
