//! su(2,1) in the Γ̃-representation: basis, structure constants, Iwasawa
//! factors and the Cartan image n a a* n*.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use super::kerr_newman::gamma_tilde;
use super::ErnstValue21;
use crate::algebra::{c, commutator, identity, CMatrix};

fn unit(i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(3, 3);
    m[(i - 1, j - 1)] = c(1.0, 0.0);
    m
}

/// X¹ … X⁸ (index 0 holds X¹).
pub fn su21_basis() -> [CMatrix; 8] {
    let i = c(0.0, 1.0);
    [
        unit(1, 3),
        unit(3, 1),
        unit(1, 1) - unit(3, 3),
        (unit(1, 1) - unit(2, 2) * c(2.0, 0.0) + unit(3, 3)) * i,
        unit(1, 2) + unit(2, 3) * i,
        unit(1, 2) * i + unit(2, 3),
        unit(2, 1) - unit(3, 2) * i,
        unit(2, 1) * i - unit(3, 2),
    ]
}

/// ‖X*Γ̃ + Γ̃X‖, zero on su(2,1).
pub fn algebra_membership(x: &CMatrix) -> f64 {
    let gt = gamma_tilde();
    (x.adjoint() * &gt + &gt * x).norm()
}

/// Integer structure constants: [Xⁱ, Xʲ] = Σ_k C(i, j)_k Xᵏ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureTable {
    c: [[[i32; 8]; 8]; 8],
}

type Entry = ((usize, usize), &'static [(usize, i32)]);

const VERIFIED: [Entry; 28] = [
    ((1, 2), &[(3, 1)]),
    ((1, 3), &[(1, -2)]),
    ((1, 4), &[]),
    ((1, 5), &[]),
    ((1, 6), &[]),
    ((1, 7), &[(6, -1)]),
    ((1, 8), &[(5, -1)]),
    ((2, 3), &[(2, 2)]),
    ((2, 4), &[]),
    ((2, 5), &[(8, -1)]),
    ((2, 6), &[(7, -1)]),
    ((2, 7), &[]),
    ((2, 8), &[]),
    ((3, 4), &[]),
    ((3, 5), &[(5, 1)]),
    ((3, 6), &[(6, 1)]),
    ((3, 7), &[(7, -1)]),
    ((3, 8), &[(8, -1)]),
    ((4, 5), &[(6, 3)]),
    ((4, 6), &[(5, -3)]),
    ((4, 7), &[(8, -3)]),
    ((4, 8), &[(7, 3)]),
    ((5, 6), &[(1, 2)]),
    ((5, 7), &[(3, 1)]),
    ((5, 8), &[(4, 1)]),
    ((6, 7), &[(4, 1)]),
    ((6, 8), &[(3, -1)]),
    ((7, 8), &[(2, 2)]),
];

impl StructureTable {
    fn from_entries(entries: &[Entry]) -> Self {
        let mut table = Self { c: [[[0; 8]; 8]; 8] };
        for &((i, j), coeffs) in entries {
            let mut row = [0; 8];
            for &(k, v) in coeffs {
                row[k - 1] = v;
            }
            table = table.with_bracket(i, j, row);
        }
        table
    }

    /// Structure constants that the basis actually satisfies.
    pub fn verified() -> Self {
        Self::from_entries(&VERIFIED)
    }

    /// The table as printed: identical to [`Self::verified`] except
    /// [X¹, X⁸] = +X⁵ and [X², X⁶] = +X⁷.
    pub fn as_printed() -> Self {
        let mut row18 = [0; 8];
        row18[4] = 1;
        let mut row26 = [0; 8];
        row26[6] = 1;
        Self::verified().with_bracket(1, 8, row18).with_bracket(2, 6, row26)
    }

    /// Replace [Xⁱ, Xʲ] (1-based, i ≠ j); [Xʲ, Xⁱ] follows by antisymmetry.
    pub fn with_bracket(mut self, i: usize, j: usize, coeffs: [i32; 8]) -> Self {
        assert!(i != j && (1..=8).contains(&i) && (1..=8).contains(&j));
        self.c[i - 1][j - 1] = coeffs;
        self.c[j - 1][i - 1] = coeffs.map(|v| -v);
        self
    }

    pub fn bracket(&self, i: usize, j: usize) -> [i32; 8] {
        self.c[i - 1][j - 1]
    }

    /// Σ_k C(i, j)_k Xᵏ.
    pub fn expand(&self, i: usize, j: usize, basis: &[CMatrix; 8]) -> CMatrix {
        let mut out = CMatrix::zeros(3, 3);
        for (k, &v) in self.bracket(i, j).iter().enumerate() {
            if v != 0 {
                out += &basis[k] * c(f64::from(v), 0.0);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketCheck {
    pub i: usize,
    pub j: usize,
    /// ‖[Xⁱ, Xʲ] − Σ_k C(i, j)_k Xᵏ‖
    pub residual: f64,
}

impl BracketCheck {
    pub fn passes(&self) -> bool {
        self.residual == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutationReport {
    pub pairs: Vec<BracketCheck>,
}

impl CommutationReport {
    pub fn all_pass(&self) -> bool {
        self.pairs.iter().all(BracketCheck::passes)
    }

    pub fn failures(&self) -> Vec<(usize, usize)> {
        self.pairs
            .iter()
            .filter(|p| !p.passes())
            .map(|p| (p.i, p.j))
            .collect()
    }
}

/// Compare all 28 brackets i < j against `table`. The basis entries are
/// 0, ±1, ±i, ±2, so the arithmetic is exact and a pass means equality.
pub fn commutation_check(table: &StructureTable) -> CommutationReport {
    let basis = su21_basis();
    let mut pairs = Vec::with_capacity(28);
    for i in 1..=8 {
        for j in i + 1..=8 {
            let actual = commutator(&basis[i - 1], &basis[j - 1]);
            pairs.push(BracketCheck {
                i,
                j,
                residual: (actual - table.expand(i, j, &basis)).norm(),
            });
        }
    }
    CommutationReport { pairs }
}

/// a(μ) = diag(e^μ, 1, e^{−μ}).
pub fn iwasawa_a(mu: f64) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        c(mu.exp(), 0.0),
        c(1.0, 0.0),
        c((-mu).exp(), 0.0),
    ]))
}

/// n(δ, η, θ) = exp(δX¹ + ηX⁵ + θX⁶) in closed form.
pub fn iwasawa_n(delta: f64, eta: f64, theta: f64) -> CMatrix {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    CMatrix::from_row_slice(
        3,
        3,
        &[
            one,
            c(eta, theta),
            c(delta, 0.5 * (eta * eta + theta * theta)),
            z,
            one,
            c(theta, eta),
            z,
            z,
            one,
        ],
    )
}

/// exp of a nilpotent 3×3 matrix: I + X + X²/2.
pub fn nilpotent_exp(x: &CMatrix) -> CMatrix {
    identity(3) + x + x * x * c(0.5, 0.0)
}

/// g g* for g = n(δ, η, θ) a(μ).
pub fn cartan_embed_su21(mu: f64, delta: f64, eta: f64, theta: f64) -> CMatrix {
    let g = iwasawa_n(delta, eta, theta) * iwasawa_a(mu);
    &g * g.adjoint()
}

/// Potentials of the Cartan image: x = e^{2μ}, y = δ, √2Φ = η + iθ,
/// E = x + |Φ|² + iy.
pub fn cartan_potentials(mu: f64, delta: f64, eta: f64, theta: f64) -> ErnstValue21 {
    let phi = c(eta, theta) / SQRT_2;
    let x = (2.0 * mu).exp();
    ErnstValue21::from_potentials(Complex64::new(x + phi.norm_sqr(), delta), phi)
}
