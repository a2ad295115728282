use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Restoring force g(x) of the oscillator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    /// g(x) = x^(2p+1)
    OddMonomial { p: u32 },
    /// g(x) = x^(2p)
    EvenMonomial { p: u32 },
    /// g(x) = a_1 x + a_2 x^2 + ... + a_(2p+1) x^(2p+1), with a_(2p+1) > 0.
    Polynomial { coeffs: Vec<f64> },
}

impl Nonlinearity {
    pub fn odd(p: u32) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidInput("odd monomial needs p >= 1".into()));
        }
        Ok(Nonlinearity::OddMonomial { p })
    }

    pub fn even(p: u32) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidInput("even monomial needs p >= 1".into()));
        }
        Ok(Nonlinearity::EvenMonomial { p })
    }

    /// `coeffs[j]` multiplies x^(j+1). The length must be odd and the leading
    /// coefficient positive.
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "polynomial needs an odd number of coefficients a_1..a_(2p+1), got {}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite polynomial coefficient".into()));
        }
        if *coeffs.last().unwrap() <= 0.0 {
            return Err(Error::InvalidInput("leading coefficient a_(2p+1) must be > 0".into()));
        }
        Ok(Nonlinearity::Polynomial { coeffs })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Nonlinearity::OddMonomial { p } => Self::odd(*p).map(|_| ()),
            Nonlinearity::EvenMonomial { p } => Self::even(*p).map(|_| ()),
            Nonlinearity::Polynomial { coeffs } => Self::polynomial(coeffs.clone()).map(|_| ()),
        }
    }

    /// The integer p of the family (for polynomials, degree = 2p + 1).
    pub fn p(&self) -> u32 {
        match self {
            Nonlinearity::OddMonomial { p } | Nonlinearity::EvenMonomial { p } => *p,
            Nonlinearity::Polynomial { coeffs } => ((coeffs.len() - 1) / 2) as u32,
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Nonlinearity::OddMonomial { p } => 2 * *p as usize + 1,
            Nonlinearity::EvenMonomial { p } => 2 * *p as usize,
            Nonlinearity::Polynomial { coeffs } => coeffs.len(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Nonlinearity::OddMonomial { p } => format!("x^{}", 2 * p + 1),
            Nonlinearity::EvenMonomial { p } => format!("x^{}", 2 * p),
            Nonlinearity::Polynomial { coeffs } => format!("polynomial of degree {}", coeffs.len()),
        }
    }

    pub fn is_even_monomial(&self) -> bool {
        matches!(self, Nonlinearity::EvenMonomial { .. })
    }

    /// Power-basis coefficients, index = exponent (constant term is always zero).
    pub fn power_coeffs(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.degree() + 1];
        match self {
            Nonlinearity::OddMonomial { .. } | Nonlinearity::EvenMonomial { .. } => {
                c[self.degree()] = 1.0;
            }
            Nonlinearity::Polynomial { coeffs } => c[1..].copy_from_slice(coeffs),
        }
        c
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Nonlinearity::OddMonomial { .. } | Nonlinearity::EvenMonomial { .. } => {
                x.powi(self.degree() as i32)
            }
            Nonlinearity::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, a| acc * x + a) * x,
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Nonlinearity::OddMonomial { .. } | Nonlinearity::EvenMonomial { .. } => {
                let n = self.degree() as i32;
                n as f64 * x.powi(n - 1)
            }
            Nonlinearity::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .rev()
                .fold(0.0, |acc, (j, a)| acc * x + (j + 1) as f64 * a),
        }
    }

    /// Antiderivative G with G(0) = 0.
    pub fn antiderivative(&self, x: f64) -> f64 {
        self.power_coeffs()
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (n, a)| acc * x + a / (n + 1) as f64)
            * x
    }

    /// All transversal real roots of g(c) = f0, sorted ascending.
    pub fn equilibrium_roots(&self, f0: f64) -> Vec<f64> {
        match self {
            Nonlinearity::OddMonomial { .. } => {
                let n = self.degree() as f64;
                if f0 == 0.0 {
                    return vec![];
                }
                let r = f0.signum() * f0.abs().powf(1.0 / n);
                vec![self.newton_polish(r, f0)]
            }
            Nonlinearity::EvenMonomial { .. } => {
                if f0 <= 0.0 {
                    return vec![];
                }
                let n = self.degree() as f64;
                let r = self.newton_polish(f0.powf(1.0 / n), f0);
                vec![-r, r]
            }
            Nonlinearity::Polynomial { coeffs } => {
                let bound = 1.0 + coeffs.iter().map(|a| a.abs()).sum::<f64>() + f0.abs();
                let h = |x: f64| self.value(x) - f0;
                let cells = 8192;
                let mut roots = Vec::new();
                let mut a = -bound;
                let mut ha = h(a);
                for i in 1..=cells {
                    let b = -bound + 2.0 * bound * i as f64 / cells as f64;
                    let hb = h(b);
                    if ha == 0.0 {
                        roots.push(a);
                    } else if ha * hb < 0.0 {
                        let r = bisect(&h, a, b, 200);
                        roots.push(self.newton_polish(r, f0));
                    }
                    a = b;
                    ha = hb;
                }
                roots.retain(|&r| self.derivative(r) != 0.0);
                roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (1.0 + b.abs()));
                roots
            }
        }
    }

    fn newton_polish(&self, mut x: f64, f0: f64) -> f64 {
        for _ in 0..8 {
            let d = self.derivative(x);
            if d == 0.0 {
                break;
            }
            let step = (self.value(x) - f0) / d;
            let nx = x - step;
            if !nx.is_finite() {
                break;
            }
            if (self.value(nx) - f0).abs() > (self.value(x) - f0).abs() {
                break;
            }
            x = nx;
            if step.abs() <= 1e-16 * x.abs() {
                break;
            }
        }
        x
    }
}

pub fn bisect(h: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let mut ha = h(a);
    for _ in 0..iters {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let hm = h(m);
        if hm == 0.0 {
            return m;
        }
        if ha * hm < 0.0 {
            b = m;
        } else {
            a = m;
            ha = hm;
        }
    }
    0.5 * (a + b)
}

/// Constant c0 with g(c0) = f0 and g'(c0) != 0. Among several roots the one with
/// the largest |g'(c0)| is returned; even monomials use the positive root.
pub fn equilibrium_c0(g: &Nonlinearity, f0: f64) -> Result<f64> {
    let roots = g.equilibrium_roots(f0);
    let pick = match g {
        Nonlinearity::EvenMonomial { .. } => roots.last().copied(),
        _ => roots
            .iter()
            .copied()
            .max_by(|a, b| g.derivative(*a).abs().total_cmp(&g.derivative(*b).abs())),
    };
    let c0 = pick.ok_or(Error::NoTransversalRoot { f0 })?;
    if g.derivative(c0) == 0.0 || (g.value(c0) - f0).abs() > 1e-12 * f0.abs().max(1.0) {
        return Err(Error::NoTransversalRoot { f0 });
    }
    Ok(c0)
}
