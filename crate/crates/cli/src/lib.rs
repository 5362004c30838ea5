//! File formats around the core library: trace documents, recipe
//! documents, and schedule CSVs.

pub mod recipe_file;
pub mod sim_csv;
pub mod trace;
