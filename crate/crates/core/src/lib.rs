//! Link budgets, topology and design tradeoffs for a WDM radar distribution
//! network.

pub mod components;
pub mod digitalpath;
pub mod linkbudget;
pub mod reference;
pub mod topology;
pub mod tradeoff;
pub mod units;
