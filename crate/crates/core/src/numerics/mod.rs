//! Root finding and quadrature.

pub mod legendre;
pub mod quadrature;
pub mod root;

pub use legendre::gauss_legendre;
pub use quadrature::{
    integrate_interval, integrate_line, integrate_plane, real_part, Integral, PanelRule,
    QuadratureConfig,
};
pub use root::{brent_root, expand_bracket, Root, RootConfig};
