pub mod angles;
pub mod error;
pub mod inscriber;
pub mod io;
pub mod octahedron;
pub mod oracle;
pub mod polytope;
pub mod sphere;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sphere.md")]
    mod sphere {}
    #[doc = include_str!("../../../book/src/special-angles.md")]
    mod special_angles {}
    #[doc = include_str!("../../../book/src/smoothing.md")]
    mod smoothing {}
    #[doc = include_str!("../../../book/src/inscribing.md")]
    mod inscribing {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
