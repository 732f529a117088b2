use crate::error::{Error, Result};

/// Open (clamped) knot vector on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
}

impl KnotVector {
    /// Uniform open knot vector with `elements` spans, plus an optional interior
    /// knot inserted at `extra` when it does not coincide with an existing one.
    pub fn uniform(degree: usize, elements: usize, extra: Option<f64>) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidRefinement(format!(
                "degree {degree} < 2 cannot represent C1 deflection fields"
            )));
        }
        if elements < 1 {
            return Err(Error::InvalidRefinement("at least one element is required".into()));
        }
        let mut interior: Vec<f64> = (1..elements).map(|i| i as f64 / elements as f64).collect();
        if let Some(u) = extra {
            let tol = 1e-10;
            if u > tol && u < 1.0 - tol && !interior.iter().any(|k| (k - u).abs() <= tol) {
                interior.push(u);
                interior.sort_by(f64::total_cmp);
            }
        }
        let mut knots = vec![0.0; degree + 1];
        knots.extend(interior);
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        Ok(Self { degree, knots })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions.
    pub fn len(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Non-empty knot spans as `(span index, start, end)`.
    pub fn spans(&self) -> Vec<(usize, f64, f64)> {
        (self.degree..self.len())
            .filter(|&i| self.knots[i + 1] > self.knots[i])
            .map(|i| (i, self.knots[i], self.knots[i + 1]))
            .collect()
    }

    /// Greville abscissae; control points placed there reproduce the identity map.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree as f64;
        (0..self.len())
            .map(|i| self.knots[i + 1..=i + self.degree].iter().sum::<f64>() / p)
            .collect()
    }

    /// Span index `i` with `u` in `[u_i, u_{i+1})`; the last span is closed at 1.
    pub fn find_span(&self, u: f64) -> usize {
        let n = self.len();
        if u >= self.knots[n] {
            return n - 1;
        }
        if u <= self.knots[self.degree] {
            return self.degree;
        }
        let (mut lo, mut hi) = (self.degree, n);
        let mut mid = (lo + hi) / 2;
        while u < self.knots[mid] || u >= self.knots[mid + 1] {
            if u < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
            mid = (lo + hi) / 2;
        }
        mid
    }

    /// Values and derivatives up to order `nd` of the `p + 1` functions active on
    /// `span`, evaluated at `u`. Row `k` of the result holds the `k`-th derivative
    /// of `N_{span-p}, ..., N_{span}`.
    pub fn basis_derivatives(&self, span: usize, u: f64, nd: usize) -> Vec<Vec<f64>> {
        let p = self.degree;
        let k = &self.knots;
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = u - k[span + 1 - j];
            right[j] = k[span + j] - u;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }

        let nd = nd.min(p);
        let mut ders = vec![vec![0.0; p + 1]; nd + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let mut a = [vec![0.0; p + 1], vec![0.0; p + 1]];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for kk in 1..=nd {
                let mut d = 0.0;
                let rk = r as isize - kk as isize;
                let pk = p - kk;
                if r >= kk {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if (r as isize - 1) <= pk as isize { kk - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                    d += a[s2][j] * ndu[idx][pk];
                }
                if r <= pk {
                    a[s2][kk] = -a[s1][kk - 1] / ndu[pk + 1][r];
                    d += a[s2][kk] * ndu[r][pk];
                }
                ders[kk][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = p as f64;
        for kk in 1..=nd {
            for v in ders[kk].iter_mut() {
                *v *= factor;
            }
            factor *= (p - kk) as f64;
        }
        ders
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Cox-de Boor recursion, used as an independent reference.
    fn cox_de_boor(knots: &[f64], i: usize, p: usize, u: f64) -> f64 {
        if p == 0 {
            let last = *knots.last().unwrap();
            let inside = knots[i] <= u && u < knots[i + 1];
            let closes = u == last && knots[i + 1] == last && knots[i] < last;
            return if inside || closes { 1.0 } else { 0.0 };
        }
        let mut v = 0.0;
        let d1 = knots[i + p] - knots[i];
        if d1 > 0.0 {
            v += (u - knots[i]) / d1 * cox_de_boor(knots, i, p - 1, u);
        }
        let d2 = knots[i + p + 1] - knots[i + 1];
        if d2 > 0.0 {
            v += (knots[i + p + 1] - u) / d2 * cox_de_boor(knots, i + 1, p - 1, u);
        }
        v
    }

    #[test]
    fn counts_and_insertion() {
        let kv = KnotVector::uniform(2, 8, None).unwrap();
        assert_eq!(kv.len(), 10);
        let kv = KnotVector::uniform(2, 8, Some(0.5)).unwrap();
        assert_eq!(kv.len(), 10);
        assert!(kv.knots().contains(&0.5));
        let kv = KnotVector::uniform(2, 8, Some(0.3)).unwrap();
        assert_eq!(kv.len(), 11);
        assert!(kv.knots().contains(&0.3));
        assert_eq!(kv.spans().len(), 9);
    }

    #[test]
    fn degree_one_is_rejected() {
        assert!(matches!(
            KnotVector::uniform(1, 4, None),
            Err(Error::InvalidRefinement(_))
        ));
    }

    #[test]
    fn matches_cox_de_boor() {
        let kv = KnotVector::uniform(3, 5, Some(0.37)).unwrap();
        for s in 0..=200 {
            let u = s as f64 / 200.0;
            let span = kv.find_span(u);
            let ders = kv.basis_derivatives(span, u, 2);
            for j in 0..=3 {
                let i = span - 3 + j;
                assert_relative_eq!(ders[0][j], cox_de_boor(kv.knots(), i, 3, u), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let kv = KnotVector::uniform(3, 4, None).unwrap();
        let h = 1e-6;
        for &u in &[0.1, 0.33, 0.6, 0.9] {
            let span = kv.find_span(u);
            let d = kv.basis_derivatives(span, u, 2);
            let dp = kv.basis_derivatives(span, u + h, 2);
            let dm = kv.basis_derivatives(span, u - h, 2);
            for j in 0..=3 {
                assert_relative_eq!(d[1][j], (dp[0][j] - dm[0][j]) / (2.0 * h), epsilon = 1e-6);
                assert_relative_eq!(d[2][j], (dp[1][j] - dm[1][j]) / (2.0 * h), epsilon = 1e-4);
            }
        }
    }

    #[test]
    fn greville_reproduces_identity() {
        let kv = KnotVector::uniform(3, 6, Some(0.45)).unwrap();
        let g = kv.greville();
        for s in 0..=50 {
            let u = s as f64 / 50.0;
            let span = kv.find_span(u);
            let d = kv.basis_derivatives(span, u, 1);
            let x: f64 = (0..=3).map(|j| d[0][j] * g[span - 3 + j]).sum();
            let dx: f64 = (0..=3).map(|j| d[1][j] * g[span - 3 + j]).sum();
            assert_relative_eq!(x, u, epsilon = 1e-14);
            assert_relative_eq!(dx, 1.0, epsilon = 1e-12);
        }
    }
}
