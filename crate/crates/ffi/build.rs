use std::env;
use std::path::PathBuf;

fn main() {
    let dir = env::var("CARGO_MANIFEST_DIR").unwrap();
    let out = PathBuf::from(&dir).join("include").join("qaw.h");
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    cbindgen::Builder::new()
        .with_crate(&dir)
        .with_config(cbindgen::Config::from_file(PathBuf::from(&dir).join("cbindgen.toml")).unwrap())
        .generate()
        .expect("unable to generate qaw.h")
        .write_to_file(out);
}
