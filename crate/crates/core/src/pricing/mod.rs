//! Closed-form and Monte Carlo pricing of European knock-out calls and puts.

pub mod closed;
pub mod mc;

pub use closed::{
    bs_vanilla, double_knockout_closed, down_and_in_call_closed, down_and_out_call_closed,
    up_and_in_call_closed, up_and_out_call_closed, ClosedFormCall, KnockOutPricer,
};
pub use mc::{mc_price, McConfig};
