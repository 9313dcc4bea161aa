pub mod characters;
pub mod error;
pub mod integrals;
pub mod linalg;
pub mod oracles;
pub mod report;
pub mod special;
