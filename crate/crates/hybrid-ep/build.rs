fn main() {
    // Nonsymmetric eigenproblems go through LAPACK's dgeev directly; link the
    // system library rather than pulling in a source build of a BLAS stack.
    println!("cargo:rustc-link-lib=dylib=lapack");
}
