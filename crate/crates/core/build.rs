fn main() {
    // LAPACK routines come from the system reference LAPACK backed by OpenBLAS.
    println!("cargo:rustc-link-lib=dylib=lapack");
    println!("cargo:rustc-link-lib=dylib=openblas");
}
