//! The holomorphic volume form `dV` and the ℍ_ℂ-valued 3-form `Dz`.

use num_complex::Complex64;

use crate::algebra::Biquaternion;

fn det3(a: [Complex64; 3], b: [Complex64; 3], c: [Complex64; 3]) -> Complex64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// `dV(Z1, Z2, Z3, Z4)`: determinant of the e-basis coordinates, normalized by
/// `dV(e0, e1, e2, e3) = 1`.
pub fn eval_dv(z1: &Biquaternion, z2: &Biquaternion, z3: &Biquaternion, z4: &Biquaternion) -> Complex64 {
    let rows = [z1.z, z2.z, z3.z, z4.z];
    let minor = |skip: usize| {
        let pick = |r: &[Complex64; 4]| -> [Complex64; 3] {
            let mut out = [Complex64::new(0.0, 0.0); 3];
            let mut j = 0;
            for (k, v) in r.iter().enumerate() {
                if k != skip {
                    out[j] = *v;
                    j += 1;
                }
            }
            out
        };
        det3(pick(&rows[1]), pick(&rows[2]), pick(&rows[3]))
    };
    (0..4)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            rows[0][k] * minor(k) * sign
        })
        .sum()
}

/// `Dz(T2, T3, T4) = Σ_i dV(e_i, T2, T3, T4) e_i`.
///
/// The e-basis is orthonormal for the pairing `⟨Z, W⟩ = Σ z_i w_i`, so this is
/// the unique element with `⟨Z1, Dz(T2, T3, T4)⟩ = dV(Z1, T2, T3, T4)`.
pub fn eval_dz(t2: &Biquaternion, t3: &Biquaternion, t4: &Biquaternion) -> Biquaternion {
    let cols = [t2.z, t3.z, t4.z];
    let mut out = Biquaternion::ZERO;
    for i in 0..4 {
        let mut rows = [[Complex64::new(0.0, 0.0); 3]; 3];
        let mut j = 0;
        for k in 0..4 {
            if k == i {
                continue;
            }
            rows[j] = [cols[0][k], cols[1][k], cols[2][k]];
            j += 1;
        }
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        out.z[i] = det3(rows[0], rows[1], rows[2]) * sign;
    }
    out
}

/// `Dz` from the coordinates of the matrix realization: with `Z = (z_ij)`,
/// ```text
/// Dz = ½ ( -dz11∧dz12∧dz21   -dz11∧dz12∧dz22 )
///        (  dz11∧dz21∧dz22    dz12∧dz21∧dz22 )
/// ```
/// Kept as an independent cross-check of [`eval_dz`].
pub fn eval_dz_matrix(t2: &Biquaternion, t3: &Biquaternion, t4: &Biquaternion) -> Biquaternion {
    let mats = [t2.to_matrix(), t3.to_matrix(), t4.to_matrix()];
    let wedge = |p: (usize, usize), q: (usize, usize), r: (usize, usize)| {
        let row = |idx: (usize, usize)| -> [Complex64; 3] { std::array::from_fn(|m| mats[m][idx.0][idx.1]) };
        det3(row(p), row(q), row(r))
    };
    let half = 0.5;
    let m = [
        [-wedge((0, 0), (0, 1), (1, 0)) * half, -wedge((0, 0), (0, 1), (1, 1)) * half],
        [wedge((0, 0), (1, 0), (1, 1)) * half, wedge((0, 1), (1, 0), (1, 1)) * half],
    ];
    Biquaternion::from_matrix(&m)
}

/// Euclidean 3-volume of three real tangent vectors, `sqrt(det G)` with `G` their Gram matrix.
pub fn frame_volume(t: &[[f64; 4]; 3]) -> f64 {
    let dot = |a: &[f64; 4], b: &[f64; 4]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let g: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| dot(&t[i], &t[j])));
    let det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
    det.max(0.0).sqrt()
}

/// Real 4×4 determinant, rows as given.
pub fn det4_real(rows: &[[f64; 4]; 4]) -> f64 {
    let z = rows.map(Biquaternion::from_real);
    eval_dv(&z[0], &z[1], &z[2], &z[3]).re
}
