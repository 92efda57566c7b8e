pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod scan;
pub mod states;
pub mod trajectory;
pub mod witnesses;
