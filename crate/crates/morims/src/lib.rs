//! Simulation and calibration toolkit for optically gated photoconductive
//! microwave switches.
//!
//! A single on-chip light source feeds silicon patches placed in the gap of
//! a microwave signal line; light makes a patch conductive and switches the
//! line. This crate models the full chain:
//!
//! * [`netlist`] — a line-oriented DSL describing the optical feed circuit;
//! * [`optical`] — power propagation through sources, waveguides, Y-branch
//!   splitters, and taps;
//! * [`photoconductor`] — absorbed optical power to complex gap impedance;
//! * [`rf`] — two-port ABCD/S-parameter algebra;
//! * [`device`] — full switches, extinction ratio, and phase shift;
//! * [`calibration`] — derivative-free least-squares fitting of the model's
//!   free parameters to measured data;
//! * [`io`] — parameter files, dataset CSV, Touchstone, and sweep CSV.
//!
//! The `morims` binary exposes the same functionality as a command line
//! tool; see the book under `book/` for a guided tour.
//!
//! ```
//! use morims::netlist::NetlistAst;
//! use morims::device::{simulate_circuit, SwitchModelSet};
//!
//! let ast = NetlistAst::parse(
//!     "source laser power_mw=2\n\
//!      switch m1 type=tapered in=laser\n",
//! )?;
//! let results = simulate_circuit(&ast, &SwitchModelSet::default(), &[5e9], 2.0)?;
//! assert!(results["m1"].records[0].r_onoff_db > 0.0);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod calibration;
pub mod cli;
pub mod device;
pub mod io;
pub mod netlist;
pub mod optical;
pub mod photoconductor;
pub mod rf;

#[cfg(doctest)]
mod book;
