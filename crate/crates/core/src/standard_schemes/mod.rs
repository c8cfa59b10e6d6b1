//! Baselines on a priori lattices: implicit centered finite differences,
//! forward Euler, and Runge–Kutta reference solutions.

pub mod fd;
pub mod rk;

pub use fd::{
    fd_step_second_order, fd_step_third_order, EulerSecondOrderState, FdSecondOrderState, FdThirdOrderState,
    UniformGrid,
};
pub use rk::{rk_reference, RkConfig, RkMethod, RkSolution};
