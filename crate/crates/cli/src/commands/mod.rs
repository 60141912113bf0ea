pub mod calibrate;
pub mod compare;
pub mod converge;
pub mod evaluate;
pub mod fixtures;
pub mod price;
pub mod sweep;
