pub mod bigraded;
pub mod certify;
pub mod cli;
pub mod cohomology;
pub mod document;
pub mod error;
pub mod fixture;
pub mod linalg;
pub mod monad;
pub mod search;
