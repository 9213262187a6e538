//! Density grids for the Figure 1 (Generalization I) and Figure 2 (Generalization II) panels.
//!
//! Figure 1: generalized Mittag-Leffler densities, nu = 0.2..1 in steps of
//! 0.2, (delta, lambda) = (0.5, 1) and (2, 1).
//! Figure 2: Xi = X^{nu/gamma} with X generalized Mittag-Leffler
//! (nu, delta = 2, lambda = 1), nu in {0.1, 0.5, 1}, one panel per gamma in
//! {-0.5, 1, 5}. The density follows from the change of variables
//! f_Xi(x) = |gamma/nu| x^{gamma/nu - 1} f_X(x^{gamma/nu}).

use std::process::ExitCode;

use genfpp::dist::{genml_pdf, GenIParams};

use crate::output::sink;
use crate::{CliError, FigureArg, FigureArgs};

pub const FIGURE1_NU: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];
pub const FIGURE1_PANELS: [(f64, f64); 2] = [(0.5, 1.0), (2.0, 1.0)];
pub const FIGURE2_NU: [f64; 3] = [0.1, 0.5, 1.0];
pub const FIGURE2_GAMMA: [f64; 3] = [-0.5, 1.0, 5.0];

fn stretched_density(p: &GenIParams, gamma: f64, x: f64) -> genfpp::Result<f64> {
    let e = gamma / p.nu;
    let y = x.powf(e);
    if y == 0.0 || !y.is_finite() {
        // the base density has no mass to speak of there
        return Ok(0.0);
    }
    Ok(e.abs() * x.powf(e - 1.0) * genml_pdf(p, y)?)
}

pub fn run(a: FigureArgs) -> Result<ExitCode, CliError> {
    if a.points == 0 || !(a.xmax > 0.0 && a.xmax.is_finite()) {
        return Err(CliError::Validation("need --points >= 1 and a positive finite --xmax".into()));
    }
    let grid: Vec<f64> = (1..=a.points).map(|i| a.xmax * i as f64 / a.points as f64).collect();
    let mut w = csv::Writer::from_writer(sink(a.out.as_deref())?);
    w.write_record(["figure", "panel", "nu", "delta", "lambda", "gamma", "x", "density"])?;
    if matches!(a.figure, FigureArg::One | FigureArg::All) {
        for (panel, &(delta, lambda)) in FIGURE1_PANELS.iter().enumerate() {
            for &nu in &FIGURE1_NU {
                let p = GenIParams::new(nu, delta, lambda)?;
                for &x in &grid {
                    let d = genml_pdf(&p, x)?;
                    w.write_record(["1", &(panel + 1).to_string(), &nu.to_string(), &delta.to_string(), &lambda.to_string(), "", &x.to_string(), &d.to_string()])?;
                }
            }
        }
    }
    if matches!(a.figure, FigureArg::Two | FigureArg::All) {
        for (panel, &gamma) in FIGURE2_GAMMA.iter().enumerate() {
            for &nu in &FIGURE2_NU {
                let p = GenIParams::new(nu, 2.0, 1.0)?;
                for &x in &grid {
                    let d = stretched_density(&p, gamma, x)?;
                    w.write_record(["2", &(panel + 1).to_string(), &nu.to_string(), "2", "1", &gamma.to_string(), &x.to_string(), &d.to_string()])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}
