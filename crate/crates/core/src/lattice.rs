//! Lagrange–Gauss reduction of planar lattices.
//!
//! Two flavours: plain floating-point bases, and integer coefficient vectors of
//! `a_t u_{p/q} ℤ²` under the quadratic form `e^t (m + n p/q)² + e^{−t} n²`. The
//! second keeps the lattice exact and only evaluates lengths in floating point.

pub type Vec2 = [f64; 2];

#[inline]
fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Reduces `(b1, b2)` in place so that `b1` is a shortest nonzero vector and
/// `|⟨b1,b2⟩| ≤ |b1|²/2`.
pub fn gauss_reduce(b1: &mut Vec2, b2: &mut Vec2) {
    let mut n1 = dot(*b1, *b1);
    let mut n2 = dot(*b2, *b2);
    if n2 < n1 {
        std::mem::swap(b1, b2);
        std::mem::swap(&mut n1, &mut n2);
    }
    loop {
        let mu = (dot(*b1, *b2) / n1).round();
        if mu != 0.0 {
            b2[0] -= mu * b1[0];
            b2[1] -= mu * b1[1];
            n2 = dot(*b2, *b2);
        }
        if n2 >= n1 {
            return;
        }
        std::mem::swap(b1, b2);
        std::mem::swap(&mut n1, &mut n2);
    }
}

/// Shortest nonzero vector length of the lattice spanned by `b1, b2`.
pub fn shortest_length(mut b1: Vec2, mut b2: Vec2) -> f64 {
    gauss_reduce(&mut b1, &mut b2);
    dot(b1, b1).sqrt()
}

/// Columns of `B^{−T}`: the dual basis, satisfying `⟨b_i, d_j⟩ = δ_ij`.
pub fn dual_basis(b1: Vec2, b2: Vec2) -> (Vec2, Vec2) {
    let det = b1[0] * b2[1] - b1[1] * b2[0];
    ([b2[1] / det, -b2[0] / det], [-b1[1] / det, b1[0] / det])
}

/// Basis of `a_t u_s ℤ²` in the plane.
pub fn orbit_basis(s: f64, t: f64) -> (Vec2, Vec2) {
    let (ex, ey) = ((t / 2.0).exp(), (-t / 2.0).exp());
    ([ex, 0.0], [ex * s, ey])
}

/// Squared shortest vector length of `a_t u_{p/q} ℤ²`, reducing integer coefficient
/// vectors `(m, n)` for the form `e^t ((mq + np)/q)² + e^{−t} n²`.
pub fn orbit_shortest_sq(p: u64, q: u64, t: f64) -> f64 {
    let (ex, ey) = (t.exp(), (-t).exp());
    let qf = q as f64;
    let form = |u: [i128; 2], v: [i128; 2]| -> f64 {
        let xu = (u[0] * q as i128 + u[1] * p as i128) as f64 / qf;
        let xv = (v[0] * q as i128 + v[1] * p as i128) as f64 / qf;
        ex * xu * xv + ey * (u[1] as f64) * (v[1] as f64)
    };
    let mut b1 = [1i128, 0];
    let mut b2 = [0i128, 1];
    let mut n1 = form(b1, b1);
    let mut n2 = form(b2, b2);
    if n2 < n1 {
        std::mem::swap(&mut b1, &mut b2);
        std::mem::swap(&mut n1, &mut n2);
    }
    loop {
        let mu = (form(b1, b2) / n1).round() as i128;
        if mu != 0 {
            b2 = [b2[0] - mu * b1[0], b2[1] - mu * b1[1]];
            n2 = form(b2, b2);
        }
        if n2 >= n1 {
            return n1;
        }
        std::mem::swap(&mut b1, &mut b2);
        std::mem::swap(&mut n1, &mut n2);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_shortest(b1: Vec2, b2: Vec2, r: i32) -> f64 {
        let mut best = f64::INFINITY;
        for m in -r..=r {
            for n in -r..=r {
                if (m, n) == (0, 0) {
                    continue;
                }
                let v = [m as f64 * b1[0] + n as f64 * b2[0], m as f64 * b1[1] + n as f64 * b2[1]];
                best = best.min(dot(v, v).sqrt());
            }
        }
        best
    }

    #[test]
    fn reduction_matches_enumeration() {
        let bases = [
            ([1.0, 0.0], [0.5, 1.0]),
            ([3.0, 1.0], [7.0, 2.5]),
            ([2.0, 0.1], [1.9, 0.2]),
            ([10.0, 0.0], [3.3, 0.1]),
        ];
        for (b1, b2) in bases {
            let fast = shortest_length(b1, b2);
            let slow = brute_shortest(b1, b2, 60);
            assert!((fast - slow).abs() < 1e-12 * slow, "{b1:?} {b2:?}");
        }
    }

    #[test]
    fn dual_basis_pairs_to_identity() {
        let (b1, b2) = ([2.0, 0.3], [0.7, 1.1]);
        let (d1, d2) = dual_basis(b1, b2);
        assert!((dot(b1, d1) - 1.0).abs() < 1e-14);
        assert!(dot(b1, d2).abs() < 1e-14);
        assert!(dot(b2, d1).abs() < 1e-14);
        assert!((dot(b2, d2) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn integer_form_reduction() {
        // u_{1/2}ℤ² at t = 0 has shortest vector (1, 0)
        assert!((orbit_shortest_sq(1, 2, 0.0) - 1.0).abs() < 1e-15);
        for &(p, q, t) in &[(3u64, 7u64, 0.7), (2, 5, 2.0), (17, 101, 5.5)] {
            let (b1, b2) = orbit_basis(p as f64 / q as f64, t);
            let slow = brute_shortest(b1, b2, 200);
            let fast = orbit_shortest_sq(p, q, t).sqrt();
            assert!((fast - slow).abs() < 1e-10 * slow, "{p}/{q} t={t}");
        }
    }
}
