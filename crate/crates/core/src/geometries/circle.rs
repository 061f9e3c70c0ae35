use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{finish, Geometry};
use crate::error::{Result, SgeoError};
use crate::hochschild::{word, HochschildChain};
use crate::operator::{MatrixOperator, C64};
use crate::triple::sampling::{Coefficients, ModeBox};
use crate::triple::{BandPolicy, Sampling, TripleParts, TruncatedTriple};

/// The circle: e_n, |n| <= Λ, D = diag(n), u the shift e_n ↦ e_{n+1}.
pub fn circle(lambda: usize, kernel_shift: f64) -> Result<Geometry> {
    if lambda < 2 {
        return Err(SgeoError::InvalidArgument("circle needs Λ >= 2".into()));
    }
    let modes = ModeBox::new(1, lambda);
    let diag: Vec<f64> = (0..modes.len()).map(|i| modes.label(i)[0] as f64).collect();
    let parts = TripleParts {
        name: format!("circle(Λ={lambda})"),
        dirac: MatrixOperator::from_real_diagonal(&diag),
        generators: BTreeMap::new(),
        unitary_pairs: vec![("u".into(), "u*".into())],
        grading: None,
        p: 1,
        mode_labels: modes.labels(),
        spinor_dim: 1,
        band: BandPolicy { lambda_full: lambda, generator_bandwidth: 1 },
        kernel_shift,
        // [D, f] = -i f'
        clifford: vec![DMatrix::from_element(1, 1, C64::new(0.0, -1.0))],
        sampling: Sampling::Fourier { modes, period: 2.0 * PI },
        provenance: vec![format!("circle lambda={lambda} kernel_shift={kernel_shift}")],
    };
    let base = TruncatedTriple::new(parts)?;
    let m1 = ModeBox::new(1, 1);
    let coeffs = |minus: C64, plus: C64| {
        let mut c = Coefficients::zeros(m1);
        c.values[0] = minus;
        c.values[2] = plus;
        c
    };
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let half = C64::new(0.5, 0.0);
    let gens = vec![
        ("u", base.element_from_coefficients(&coeffs(zero, one))?),
        ("u*", base.element_from_coefficients(&coeffs(one, zero))?),
        ("cos", base.element_from_coefficients(&coeffs(half, half))?),
        ("sin", base.element_from_coefficients(&coeffs(C64::new(0.0, 0.5), C64::new(0.0, -0.5)))?),
    ];
    let triple = finish(base, gens)?;
    let cycle = HochschildChain::term(one, vec![word(&["u*"]), word(&["u"])])?;
    Ok(Geometry { triple, cycle: Some(cycle) })
}
