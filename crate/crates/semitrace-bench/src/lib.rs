//! Fixtures shared by the benches.

use std::f64::consts::SQRT_2;

use semitrace::gutzwiller::{Bump, ModelGeometry, Profile, Window};
use semitrace::heatkernel::JetData;
use semitrace::symplectic::BlockDecomposition;

pub fn window() -> Window {
    let f = Profile::Bump(Bump::new(0.0, 0.0, 1.2).expect("valid bump"));
    Window::new(f, Bump::new(0.0, 0.4, 1.6).expect("valid bump"), 0.3).expect("valid window")
}

pub fn chi() -> Bump {
    Bump::new(0.0, 0.5, 1.5).expect("valid bump")
}

pub fn elliptic() -> ModelGeometry {
    ModelGeometry::new(1.0, 1.0, vec![SQRT_2], vec![1.0]).expect("non-resonant")
}

pub fn mixed_decomposition() -> BlockDecomposition {
    BlockDecomposition {
        elliptic: vec![SQRT_2],
        pos_hyp: vec![0.7],
        neg_hyp: vec![],
        loxodromic: vec![(0.5, 1.0)],
    }
}

/// Deterministic antisymmetric jet with every `A_{j0j}` and `A_{jk0}` populated.
pub fn jet(mu: Vec<f64>) -> JetData {
    let mut jet = JetData::zeros(mu);
    let n = jet.n();
    for j in 0..n {
        for k in 0..j {
            for l in 0..n {
                jet.set_antisymmetric(j, k, l, ((j * 7 + k * 3 + l) as f64 * 0.37).sin());
            }
        }
    }
    jet
}
