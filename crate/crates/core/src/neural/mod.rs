pub mod mlp;
pub mod relax;
