//! Arithmetic over GF(2^p), 2 <= p <= 8, using log/antilog tables.
//!
//! Symbols are plain `u8` values whose binary expansion is the polynomial
//! representation (bit `i` is the coefficient of `x^i`). The [`Field`] is
//! passed explicitly wherever multiplication or division is needed.

use crate::Error;

/// A GF(q) symbol, `value < q`.
pub type Symbol = u8;

pub const MIN_EXPONENT: u32 = 2;
pub const MAX_EXPONENT: u32 = 8;

/// Default primitive polynomial for each exponent `p`, as a bitmask with
/// bit `p` set.
///
/// | p | poly        |
/// |---|-------------|
/// | 2 | 0b111       |
/// | 3 | 0b1011      |
/// | 4 | 0b10011     |
/// | 5 | 0b100101    |
/// | 6 | 0b1000011   |
/// | 7 | 0b10001001  |
/// | 8 | 0b100011101 |
pub fn default_poly(p: u32) -> Option<u32> {
    match p {
        2 => Some(0b111),
        3 => Some(0b1011),
        4 => Some(0b10011),
        5 => Some(0b100101),
        6 => Some(0b1000011),
        7 => Some(0b10001001),
        8 => Some(0b100011101),
        _ => None,
    }
}

/// Field context: order, primitive polynomial and the log/antilog tables.
///
/// Immutable after construction.
#[derive(Clone)]
pub struct Field {
    p: u32,
    q: usize,
    poly: u32,
    /// `log[a]` for nonzero `a`; `log[0]` is unused.
    log: [u8; 256],
    /// `exp[i] = alpha^i`, stored twice over so `log a + log b` never needs a
    /// modulo.
    exp: [u8; 510],
}

impl core::fmt::Debug for Field {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Field")
            .field("q", &self.q)
            .field("poly", &format_args!("{:#b}", self.poly))
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.poly == other.poly
    }
}

impl Eq for Field {}

impl Field {
    /// Builds GF(2^p). `poly` defaults to [`default_poly`].
    ///
    /// Fails when `p` is out of range, when `poly` is not of degree `p`, or
    /// when `x` does not generate the full multiplicative group modulo `poly`.
    pub fn new(p: u32, poly: Option<u32>) -> Result<Field, Error> {
        if !(MIN_EXPONENT..=MAX_EXPONENT).contains(&p) {
            return Err(Error::ExponentOutOfRange(p));
        }
        let poly = match poly {
            Some(poly) => poly,
            None => default_poly(p).expect("default exists for every supported p"),
        };
        if poly >> p != 1 {
            return Err(Error::PolynomialDegree { poly, p });
        }
        let q = 1usize << p;
        let order = q - 1;
        let mut log = [0u8; 256];
        let mut exp = [0u8; 510];
        let mut seen = [false; 256];
        let mut x: u32 = 1;
        for i in 0..order {
            if seen[x as usize] || x == 0 {
                return Err(Error::NotPrimitive { poly, p });
            }
            seen[x as usize] = true;
            exp[i] = x as u8;
            exp[i + order] = x as u8;
            log[x as usize] = i as u8;
            x <<= 1;
            if x & (1 << p) != 0 {
                x ^= poly;
            }
        }
        // alpha^(q-1) must close the cycle back to 1.
        if x != 1 {
            return Err(Error::NotPrimitive { poly, p });
        }
        Ok(Field {
            p,
            q,
            poly,
            log,
            exp,
        })
    }

    /// Builds the field of order `q` with the default polynomial.
    pub fn with_order(q: usize) -> Result<Field, Error> {
        if !q.is_power_of_two() {
            return Err(Error::OrderNotPowerOfTwo(q));
        }
        Field::new(q.trailing_zeros(), None)
    }

    /// Field order q.
    #[inline]
    pub fn order(&self) -> usize {
        self.q
    }

    /// Bits per symbol, p = log2 q.
    #[inline]
    pub fn bits(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn poly(&self) -> u32 {
        self.poly
    }

    #[inline]
    pub fn contains(&self, a: Symbol) -> bool {
        (a as usize) < self.q
    }

    /// Discrete log of a nonzero element.
    #[inline]
    pub fn log(&self, a: Symbol) -> Option<usize> {
        if a == 0 || !self.contains(a) {
            None
        } else {
            Some(self.log[a as usize] as usize)
        }
    }

    /// `alpha^i` for any `i`.
    #[inline]
    pub fn exp(&self, i: usize) -> Symbol {
        self.exp[i % (self.q - 1)]
    }

    #[inline]
    pub fn add(a: Symbol, b: Symbol) -> Symbol {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
    }

    /// `a / b`; fails for `b = 0`.
    #[inline]
    pub fn div(&self, a: Symbol, b: Symbol) -> Result<Symbol, Error> {
        if b == 0 {
            return Err(Error::DivisionByZero);
        }
        if a == 0 {
            return Ok(0);
        }
        let order = self.q - 1;
        let l = self.log[a as usize] as usize + order - self.log[b as usize] as usize;
        Ok(self.exp[l])
    }

    #[inline]
    pub fn inv(&self, a: Symbol) -> Result<Symbol, Error> {
        self.div(1, a)
    }

    /// Iterator over the nonzero elements `1..q`.
    pub fn nonzero(&self) -> impl Iterator<Item = Symbol> {
        (1..self.q).map(|a| a as Symbol)
    }
}
