//! The five verbs of the command line.

mod branch;
mod compare;
mod predict;
mod shoot;
mod simulate;

use crate::config::Config;
use crate::failure::Failure;
use crate::output::{Meta, Output};

pub use branch::run as continuation;
pub use compare::run as compare;
pub use predict::run as predict;
pub use shoot::run as shoot;
pub use simulate::run as simulate;

/// Everything a command needs.
pub struct Context {
    pub cfg: Config,
    pub out: Output,
    pub seed: u64,
    pub paper_scale: bool,
}

impl Context {
    pub fn meta<'a>(&'a self, command: &'a str, target: &'a str) -> Meta<'a> {
        Meta { command, target, seed: self.seed, paper_scale: self.paper_scale, version: env!("CARGO_PKG_VERSION"), config: &self.cfg }
    }
}

/// Maps `f` over `items` on the worker pool, keeping input order.
pub fn fan_out<T, R, F>(items: &[T], f: F) -> Result<Vec<R>, Failure>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> Result<R, Failure> + Sync,
{
    use rayon::prelude::*;
    items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect()
}
