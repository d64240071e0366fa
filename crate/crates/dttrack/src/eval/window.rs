//! The Hanning center prior applied to score maps at inference.

/// SxS outer product of the 1-D Hanning vector w[i] = 0.5*(1 - cos(2*pi*i/(S-1))),
/// peak-normalized to 1. Built by mirroring so the symmetry is exact in
/// floating point; borders are exactly zero.
#[derive(Clone, Debug)]
pub struct HannWindow {
    side: usize,
    weights: Vec<f64>,
}

impl HannWindow {
    pub fn new(side: usize) -> HannWindow {
        assert!(side >= 1, "window side must be positive");
        if side <= 2 {
            // Degenerate grids have no interior; fall back to a flat window.
            return HannWindow {
                side,
                weights: vec![1.0; side * side],
            };
        }
        let mut line = vec![0.0; side];
        for i in 0..=(side - 1) / 2 {
            let v = 0.5 * (1.0 - (std::f64::consts::TAU * i as f64 / (side - 1) as f64).cos());
            line[i] = v;
            line[side - 1 - i] = v;
        }
        let peak = line.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut weights = vec![0.0; side * side];
        for i in 0..side {
            for j in 0..side {
                weights[i * side + j] = line[i] * line[j] / (peak * peak);
            }
        }
        HannWindow { side, weights }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.side + col]
    }
}

/// Blends the positional prior into a score map:
/// out = (1 - gamma) * score + gamma * (score * window).
/// gamma = 1 is the pure multiplicative penalty; gamma = 0 is the identity.
pub fn penalize(score: &[f64], window: &HannWindow, gamma: f64) -> Vec<f64> {
    assert_eq!(
        score.len(),
        window.weights.len(),
        "score map and window must agree in size"
    );
    score
        .iter()
        .zip(&window.weights)
        .map(|(s, w)| (1.0 - gamma) * s + gamma * s * w)
        .collect()
}
