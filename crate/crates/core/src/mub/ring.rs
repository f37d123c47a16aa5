//! Arithmetic in the Galois ring GR(4, n) = Z₄[x]/(h(x)).

use crate::error::{QnasError, Result};

/// Monic basic primitive polynomials over Z₄, coefficients `c0..cn`.
const PRIMITIVE: [&[u8]; 9] = [
    &[3, 1],
    &[1, 1, 1],
    &[3, 1, 2, 1],
    &[1, 3, 2, 0, 1],
    &[3, 2, 3, 0, 0, 1],
    &[1, 3, 0, 2, 0, 0, 1],
    &[3, 1, 0, 0, 2, 0, 0, 1],
    &[1, 2, 1, 3, 0, 1, 0, 0, 1],
    &[3, 0, 2, 0, 3, 0, 0, 0, 0, 1],
];

pub const MAX_DEGREE: usize = PRIMITIVE.len();

/// Element of GR(4, n): coefficients of `1, x, …, x^{n-1}` modulo 4.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaloisRingElement {
    pub coeffs: Vec<u8>,
}

impl GaloisRingElement {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Reduction modulo 2 packed as a bit mask (bit i = coefficient of x^i).
    pub fn mod2_bits(&self) -> usize {
        self.coeffs.iter().enumerate().fold(0, |acc, (i, &c)| acc | (((c & 1) as usize) << i))
    }

    /// Value of a constant element, `None` if any higher coefficient is set.
    pub fn as_constant(&self) -> Option<u8> {
        self.coeffs[1..].iter().all(|&c| c == 0).then_some(self.coeffs[0])
    }
}

#[derive(Clone, Debug)]
pub struct GaloisRing {
    n: usize,
    h: Vec<u8>,
    teich: Vec<GaloisRingElement>,
    /// mod-2 bit pattern -> Teichmüller index
    lift: Vec<usize>,
}

impl GaloisRing {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_DEGREE {
            return Err(QnasError::Configuration(format!(
                "no primitive polynomial configured for GR(4,{n}); supported degrees are 1..={MAX_DEGREE}"
            )));
        }
        let h = PRIMITIVE[n - 1].to_vec();
        let mut ring = GaloisRing { n, h, teich: Vec::new(), lift: Vec::new() };
        let size = 1usize << n;
        let xi = ring.xi();
        let mut teich = Vec::with_capacity(size);
        teich.push(ring.zero());
        let mut p = ring.one();
        for _ in 0..size - 1 {
            teich.push(p.clone());
            p = ring.mul(&p, &xi);
        }
        if p != ring.one() {
            return Err(QnasError::Configuration(format!("generator order is not 2^{n}-1")));
        }
        let mut lift = vec![usize::MAX; size];
        for (i, t) in teich.iter().enumerate() {
            let bits = t.mod2_bits();
            if lift[bits] != usize::MAX {
                return Err(QnasError::Configuration(format!("polynomial for n={n} is not primitive")));
            }
            lift[bits] = i;
        }
        ring.teich = teich;
        ring.lift = lift;
        Ok(ring)
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// `c0..cn` of the defining polynomial.
    pub fn polynomial(&self) -> &[u8] {
        &self.h
    }

    pub fn zero(&self) -> GaloisRingElement {
        GaloisRingElement { coeffs: vec![0; self.n] }
    }

    pub fn one(&self) -> GaloisRingElement {
        let mut e = self.zero();
        e.coeffs[0] = 1;
        e
    }

    pub fn constant(&self, v: u8) -> GaloisRingElement {
        let mut e = self.zero();
        e.coeffs[0] = v % 4;
        e
    }

    /// The class of `x`, of multiplicative order `2^n - 1`.
    pub fn xi(&self) -> GaloisRingElement {
        let mut e = self.zero();
        if self.n == 1 {
            e.coeffs[0] = (4 - self.h[0]) % 4;
        } else {
            e.coeffs[1] = 1;
        }
        e
    }

    /// Element from its index in `0..4^n` (two bits per coefficient).
    pub fn element(&self, index: usize) -> GaloisRingElement {
        GaloisRingElement { coeffs: (0..self.n).map(|i| ((index >> (2 * i)) & 3) as u8).collect() }
    }

    pub fn add(&self, a: &GaloisRingElement, b: &GaloisRingElement) -> GaloisRingElement {
        GaloisRingElement { coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x + y) % 4).collect() }
    }

    pub fn scale(&self, k: u8, a: &GaloisRingElement) -> GaloisRingElement {
        GaloisRingElement { coeffs: a.coeffs.iter().map(|&x| (k * x) % 4).collect() }
    }

    pub fn mul(&self, a: &GaloisRingElement, b: &GaloisRingElement) -> GaloisRingElement {
        let n = self.n;
        let mut r = vec![0u32; 2 * n];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                r[i + j] += x as u32 * y as u32;
            }
        }
        for k in (n..2 * n).rev() {
            let c = r[k] % 4;
            r[k] = 0;
            if c != 0 {
                for i in 0..n {
                    r[k - n + i] += 4 * 4 - c * self.h[i] as u32;
                }
            }
        }
        GaloisRingElement { coeffs: r[..n].iter().map(|&v| (v % 4) as u8).collect() }
    }

    /// `{0, 1, ξ, …, ξ^{2^n-2}}`.
    pub fn teichmuller(&self) -> &[GaloisRingElement] {
        &self.teich
    }

    /// Unique `(a, b)` with `r = a + 2b`, both Teichmüller, returned as indices.
    pub fn decompose(&self, r: &GaloisRingElement) -> (usize, usize) {
        let ai = self.lift[r.mod2_bits()];
        let diff = self.add(r, &self.scale(3, &self.teich[ai]));
        debug_assert!(diff.coeffs.iter().all(|&c| c % 2 == 0));
        let half = GaloisRingElement { coeffs: diff.coeffs.iter().map(|&c| c / 2).collect() };
        (ai, self.lift[half.mod2_bits()])
    }

    /// σ(a + 2b) = a² + 2b².
    pub fn frobenius(&self, r: &GaloisRingElement) -> GaloisRingElement {
        let (ai, bi) = self.decompose(r);
        let (a, b) = (&self.teich[ai], &self.teich[bi]);
        self.add(&self.mul(a, a), &self.scale(2, &self.mul(b, b)))
    }

    /// tr(r) = Σ_{k<n} σ^k(r), an element of Z₄.
    pub fn trace(&self, r: &GaloisRingElement) -> u8 {
        let mut acc = self.zero();
        let mut s = r.clone();
        for _ in 0..self.n {
            acc = self.add(&acc, &s);
            s = self.frobenius(&s);
        }
        acc.as_constant().expect("trace lies in Z4")
    }
}

/// Teichmüller set of GR(4, n).
pub fn teichmuller_set(n: usize) -> Result<Vec<GaloisRingElement>> {
    Ok(GaloisRing::new(n)?.teichmuller().to_vec())
}

/// Generalized trace of an element of GR(4, n).
pub fn gr_trace(x: &GaloisRingElement, n: usize) -> Result<u8> {
    let ring = GaloisRing::new(n)?;
    if x.coeffs.len() != n || x.coeffs.iter().any(|&c| c > 3) {
        return Err(QnasError::InvalidArgument(format!("not an element of GR(4,{n})")));
    }
    Ok(ring.trace(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Trace of the Z₄-linear map y ↦ r·y in the basis 1, x, …, x^{n-1}.
    fn matrix_trace(ring: &GaloisRing, r: &GaloisRingElement) -> u8 {
        let n = ring.degree();
        let mut t = 0u32;
        for i in 0..n {
            let mut basis = ring.zero();
            basis.coeffs[i] = 1;
            t += ring.mul(r, &basis).coeffs[i] as u32;
        }
        (t % 4) as u8
    }

    #[test]
    fn degree_one_is_z4() {
        let ring = GaloisRing::new(1).unwrap();
        let t: Vec<u8> = ring.teichmuller().iter().map(|e| e.coeffs[0]).collect();
        assert_eq!(t, vec![0, 1]);
        for v in 0..4 {
            assert_eq!(ring.trace(&ring.constant(v)), v);
        }
    }

    #[test]
    fn degree_two_teichmuller() {
        let ring = GaloisRing::new(2).unwrap();
        assert_eq!(ring.polynomial(), &[1, 1, 1]);
        let xi = ring.xi();
        let xi2 = ring.mul(&xi, &xi);
        assert_eq!(ring.mul(&xi2, &xi), ring.one());
        assert_ne!(xi2, ring.one());
        // x^2 = -x - 1 = 3 + 3x
        assert_eq!(xi2.coeffs, vec![3, 3]);
        assert_eq!(ring.teichmuller(), &[ring.zero(), ring.one(), xi, xi2]);
    }

    #[test]
    fn decomposition_is_unique_and_exhaustive() {
        for n in 1..=4 {
            let ring = GaloisRing::new(n).unwrap();
            let t = ring.teichmuller();
            let mut seen = HashSet::new();
            for a in t {
                for b in t {
                    assert!(seen.insert(ring.add(a, &ring.scale(2, b))));
                }
            }
            assert_eq!(seen.len(), 1 << (2 * n));
            for idx in 0..1 << (2 * n) {
                let r = ring.element(idx);
                let (ai, bi) = ring.decompose(&r);
                assert_eq!(ring.add(&t[ai], &ring.scale(2, &t[bi])), r);
            }
        }
    }

    #[test]
    fn every_configured_polynomial_is_primitive() {
        for n in 1..=MAX_DEGREE {
            let ring = GaloisRing::new(n).unwrap();
            assert_eq!(ring.teichmuller().len(), 1 << n);
            let distinct: HashSet<_> = ring.teichmuller().iter().collect();
            assert_eq!(distinct.len(), 1 << n);
        }
        assert!(GaloisRing::new(0).is_err());
        assert!(GaloisRing::new(10).is_err());
    }

    #[test]
    fn trace_is_additive_for_degree_two() {
        let ring = GaloisRing::new(2).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let (a, b) = (ring.element(i), ring.element(j));
                assert_eq!(ring.trace(&ring.add(&a, &b)), (ring.trace(&a) + ring.trace(&b)) % 4);
            }
        }
        assert_eq!(ring.trace(&ring.zero()), 0);
    }

    #[test]
    fn trace_matches_multiplication_matrix_trace() {
        for n in 1..=5 {
            let ring = GaloisRing::new(n).unwrap();
            let limit = (1usize << (2 * n)).min(1024);
            for idx in 0..limit {
                let r = ring.element(idx * ((1 << (2 * n)) / limit));
                assert_eq!(ring.trace(&r), matrix_trace(&ring, &r), "n={n} r={r:?}");
            }
        }
    }

    #[test]
    fn frobenius_fixes_teichmuller_squares() {
        let ring = GaloisRing::new(3).unwrap();
        for t in ring.teichmuller() {
            assert_eq!(ring.frobenius(t), ring.mul(t, t));
        }
    }

    #[test]
    fn public_wrappers() {
        assert_eq!(teichmuller_set(3).unwrap().len(), 8);
        let ring = GaloisRing::new(3).unwrap();
        let e = ring.element(37);
        assert_eq!(gr_trace(&e, 3).unwrap(), ring.trace(&e));
        assert!(gr_trace(&ring.element(1), 2).is_err());
    }
}
