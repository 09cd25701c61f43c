//! Compiles the guide's Rust snippets as doctests.

pub use powergeom;

macro_rules! chapter {
    ($name:ident, $file:literal) => {
        #[cfg(doctest)]
        #[doc = include_str!(concat!("../../../book/src/", $file))]
        mod $name {}
    };
}

chapter!(intro, "intro.md");
chapter!(finite_differences, "finite-differences.md");
chapter!(hessian_geometry, "hessian-geometry.md");
chapter!(lr_lines, "lr-lines.md");
chapter!(lcr_lines, "lcr-lines.md");
chapter!(networks, "networks.md");
chapter!(cli, "cli.md");
