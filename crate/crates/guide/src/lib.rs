//! The code listings of the guide in `book/`, compiled and run as
//! doc-tests. One module per chapter, so a failing listing names its
//! chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/ordinals.md")]
pub mod ordinals {}
#[doc = include_str!("../../../book/src/formulas.md")]
pub mod formulas {}
#[doc = include_str!("../../../book/src/theories.md")]
pub mod theories {}
#[doc = include_str!("../../../book/src/certificates.md")]
pub mod certificates {}
#[doc = include_str!("../../../book/src/search.md")]
pub mod search {}
#[doc = include_str!("../../../book/src/harnesses.md")]
pub mod harnesses {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../book/src/formats.md")]
pub mod formats {}
