//! Published benchmark values for the four NIG parameter sets of
//! [`nig_reference_sets`](crate::mgf::nig_reference_sets), rounded to four
//! decimals. Index `i` refers to `NIG_{i+1}`.

/// `(lambda, V@R, CV@R)` per level.
pub const VAR_CVAR: [(f64, [f64; 4], [f64; 4]); 2] = [
    (
        0.05,
        [0.0210, 0.0311, 0.0073, 1.5914],
        [0.0298, 0.0585, 0.0352, 2.2872],
    ),
    (
        0.01,
        [0.0350, 0.0737, 0.0369, 2.7019],
        [0.0444, 0.1108, 0.1162, 3.4503],
    ),
];

/// `(gamma, [(eta*, rho)])` for the polynomial loss.
pub const POLYNOMIAL: [(u32, [(f64, f64); 4]); 3] = [
    (
        2,
        [
            (-0.0028, 0.0028),
            (-0.0031, 0.0033),
            (-0.0009, 0.0011),
            (-0.0957, 0.4380),
        ],
    ),
    (
        4,
        [
            (-0.0029, 0.0030),
            (-0.0035, 0.0037),
            (-0.0013, 0.0017),
            (-1.0283, 1.4994),
        ],
    ),
    (
        5,
        [
            (-0.0030, 0.0031),
            (-0.0037, 0.0039),
            (-0.0017, 0.0023),
            (-1.8095, 2.3915),
        ],
    ),
];

/// Cell tolerance `max(abs, rel * |reference|)`.
pub fn tolerance(reference: f64, abs: f64, rel: f64) -> f64 {
    abs.max(rel * reference.abs())
}

/// Tolerances of the V@R / CV@R and polynomial cells.
pub const VAR_CVAR_TOL: (f64, f64) = (5e-4, 1e-3);
pub const POLYNOMIAL_TOL: (f64, f64) = (5e-4, 2e-3);
