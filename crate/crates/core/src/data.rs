//! Embedded Zaire 1974 automobile liability claim counts and the published
//! reference fit for them.

use crate::estimate::CountData;

/// (claims, policies) for private cars, n = 4000.
pub const ZAIRE_COUNTS: [(u64, u64); 6] = [(0, 3719), (1, 232), (2, 38), (3, 7), (4, 3), (5, 1)];

pub fn zaire_dataset() -> CountData {
    CountData::new(ZAIRE_COUNTS.to_vec()).expect("embedded dataset is valid")
}

/// The dataset as a two-column text file.
pub fn zaire_text() -> String {
    let mut out = String::from("# Zaire 1974 automobile liability, private cars\n# count frequency\n");
    for (x, f) in ZAIRE_COUNTS {
        out += &format!("{x} {f}\n");
    }
    out
}

/// One fitted model in the reference table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceFit {
    /// Expected counts for 0..=5 as printed (two decimals).
    pub expected: [f64; 6],
    pub chi_square: f64,
    /// In percent.
    pub p_value_percent: f64,
    pub log_likelihood: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceTable {
    pub observed: [(u64, u64); 6],
    pub negative_binomial: ReferenceFit,
    pub poisson_inverse_gaussian: ReferenceFit,
    pub nbl: ReferenceFit,
    pub mle: (f64, f64),
    pub mle_std_errors: (f64, f64),
    pub em: (f64, f64),
    pub em_iterations: u64,
    pub em_log_likelihood: f64,
    pub sample_mean: f64,
    pub sample_variance: f64,
}

/// Published values, rounded as printed. Parameter pairs are (r, θ).
pub const REFERENCE: ReferenceTable = ReferenceTable {
    observed: ZAIRE_COUNTS,
    negative_binomial: ReferenceFit {
        expected: [3719.22, 229.90, 39.91, 8.42, 1.93, 0.46],
        chi_square: 1.17,
        p_value_percent: 55.70,
        log_likelihood: -1183.550,
    },
    poisson_inverse_gaussian: ReferenceFit {
        expected: [3718.58, 234.54, 34.86, 8.32, 2.45, 0.80],
        chi_square: 0.54,
        p_value_percent: 76.20,
        log_likelihood: -1183.524,
    },
    nbl: ReferenceFit {
        expected: [3718.82, 232.98, 36.59, 8.21, 2.26, 0.72],
        chi_square: 0.06,
        p_value_percent: 80.33,
        log_likelihood: -1183.430,
    },
    mle: (0.486, 6.381),
    mle_std_errors: (0.12, 1.50),
    em: (0.509, 6.663),
    em_iterations: 155,
    em_log_likelihood: -1183.45,
    sample_mean: 0.08,
    sample_variance: 0.12,
};
