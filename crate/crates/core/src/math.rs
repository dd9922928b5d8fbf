//! Small numeric helpers shared across modules.

/// Numerically stable softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; z.len()];
    softmax_into(z, &mut out);
    out
}

pub fn softmax_into(z: &[f64], out: &mut [f64]) {
    debug_assert_eq!(z.len(), out.len());
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &v) in out.iter_mut().zip(z) {
        *o = (v - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

/// Transposed softmax Jacobian applied to `g`: `s ⊙ (g − ⟨s, g⟩)`.
pub fn softmax_vjp(s: &[f64], g: &[f64], out: &mut [f64]) {
    let dot: f64 = s.iter().zip(g).map(|(a, b)| a * b).sum();
    for ((o, &si), &gi) in out.iter_mut().zip(s).zip(g) {
        *o = si * (gi - dot);
    }
}

/// Two-way softmax share of `a` against `b`, i.e. `σ(a − b)`.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumsum += uk;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}
