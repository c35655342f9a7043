//! Grid-world urban fire evacuation with a panic-driven evacuee and two
//! cooperating rescuer drones, plus a recurrent PPO trainer and an evaluation
//! harness.

pub mod env;
pub mod evacuee;
pub mod fire;
pub mod harness;
pub mod policy;
pub mod ppo;
pub mod world;
