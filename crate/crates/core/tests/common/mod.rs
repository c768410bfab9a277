//! Test corpus shared by the integration tests.

#![allow(dead_code)]

use centerfocus_core::series::{Coefficient, Poly2, VectorField2};

pub struct CorpusField {
    pub name: &'static str,
    pub field: VectorField2,
    /// Known independently (Hamiltonian, reversible or closed-form focus).
    pub center: bool,
}

pub fn poly(n: u32, terms: &[(u32, u32, i64)]) -> Poly2 {
    Poly2::from_int_terms(n, terms)
}

pub fn field(n: u32, p: &[(u32, u32, i64)], q: &[(u32, u32, i64)]) -> VectorField2 {
    VectorField2::new(poly(n, p), poly(n, q))
}

/// `−H_y ∂x + H_x ∂y`.
pub fn hamiltonian_field(h: &Poly2) -> VectorField2 {
    VectorField2::new(h.partial_y().neg(), h.partial_x())
}

pub fn half() -> Coefficient {
    Coefficient::ratio(1, 2)
}

pub fn corpus(n: u32) -> Vec<CorpusField> {
    let h_a = Poly2::from_terms(
        n + 1,
        [
            (2, 0, half()),
            (0, 2, half()),
            (2, 1, Coefficient::from_int(1)),
            (0, 3, Coefficient::ratio(-1, 3)),
        ],
    );
    let h_b = Poly2::from_terms(
        n + 1,
        [
            (2, 0, half()),
            (0, 2, half()),
            (1, 2, Coefficient::from_int(1)),
            (4, 0, Coefficient::ratio(1, 4)),
        ],
    );
    vec![
        CorpusField {
            name: "linear_center",
            field: field(n, &[(0, 1, -1)], &[(1, 0, 1)]),
            center: true,
        },
        CorpusField {
            name: "hamiltonian_cubic",
            field: field(n, &[(0, 1, -1)], &[(1, 0, 1), (2, 0, 1)]),
            center: true,
        },
        CorpusField {
            name: "unstable_focus",
            field: field(n, &[(0, 1, -1), (3, 0, 1), (1, 2, 1)], &[(1, 0, 1), (2, 1, 1), (0, 3, 1)]),
            center: false,
        },
        CorpusField {
            name: "stable_focus",
            field: field(n, &[(0, 1, -1), (3, 0, -1)], &[(1, 0, 1), (0, 3, -1)]),
            center: false,
        },
        CorpusField {
            name: "hamiltonian_perturbation_a",
            field: hamiltonian_field(&h_a),
            center: true,
        },
        CorpusField {
            name: "hamiltonian_perturbation_b",
            field: hamiltonian_field(&h_b),
            center: true,
        },
        CorpusField {
            name: "reversible_center",
            field: field(n, &[(0, 1, -1), (1, 1, 1)], &[(1, 0, 1), (2, 0, 1), (0, 2, 1)]),
            center: true,
        },
    ]
}
