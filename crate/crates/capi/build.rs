fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    let out = std::path::Path::new(&crate_dir).join("include").join("causal_locus.h");
    println!("cargo:rerun-if-changed=src/lib.rs");
    match cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_language(cbindgen::Language::C)
        .with_include_guard("CAUSAL_LOCUS_H")
        .with_cpp_compat(true)
        .generate()
    {
        Ok(bindings) => {
            std::fs::create_dir_all(out.parent().unwrap()).unwrap();
            bindings.write_to_file(out);
        }
        // keep a previously generated header usable if generation fails
        Err(e) => println!("cargo:warning=cbindgen failed: {e}"),
    }
}
