//! Scalar and operator expressions.
//!
//! Subexpressions that involve no operator are folded to a single complex
//! number while parsing, and nested scalings are merged, so every
//! expression has one canonical tree.

use num_complex::Complex64;

use super::parse::Cursor;
use super::{DslError, Pos, MAX_DEPTH};

/// Most binary operations accepted in one expression.
const MAX_OPERATIONS: usize = 1024;

/// `factor=label1,label2`: the factor restricted to the listed labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub factor: String,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Identity,
    /// Product of per-factor selections; identity on unlisted factors.
    Projector(Vec<Selection>),
    Scaled(Complex64, Box<Expr>),
    Sum(Box<Expr>, Box<Expr>),
    Difference(Box<Expr>, Box<Expr>),
    Product(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub(crate) fn scaled(c: Complex64, e: Expr) -> Expr {
        match e {
            Expr::Scaled(d, inner) => Expr::Scaled(c * d, inner),
            other => Expr::Scaled(c, Box::new(other)),
        }
    }

    /// Every projector selection in the tree, in order.
    pub fn selections(&self) -> Vec<&Selection> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a Selection>) {
        match self {
            Expr::Identity => {}
            Expr::Projector(s) => out.extend(s.iter()),
            Expr::Scaled(_, e) => e.collect(out),
            Expr::Sum(a, b) | Expr::Difference(a, b) | Expr::Product(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }
}

enum Value {
    Scalar(Complex64),
    Op(Expr),
}

fn as_op(v: Value) -> Expr {
    match v {
        Value::Scalar(c) => Expr::Scaled(c, Box::new(Expr::Identity)),
        Value::Op(e) => e,
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Division that stays exact for real divisors.
fn divide(a: Complex64, b: Complex64) -> Complex64 {
    if b.im == 0.0 {
        Complex64::new(a.re / b.re, a.im / b.re)
    } else {
        a / b
    }
}

fn apply_function(name: &str, z: Complex64) -> Complex64 {
    let on_real = z.im == 0.0;
    match name {
        "sqrt" if on_real && z.re >= 0.0 => real(z.re.sqrt()),
        "sqrt" if on_real => Complex64::new(0.0, (-z.re).sqrt()),
        "sqrt" => z.sqrt(),
        "exp" if on_real => real(z.re.exp()),
        "exp" => z.exp(),
        "sin" if on_real => real(z.re.sin()),
        "sin" => z.sin(),
        "cos" if on_real => real(z.re.cos()),
        "cos" => z.cos(),
        "conj" => z.conj(),
        _ => unreachable!("function names are checked by the caller"),
    }
}

const FUNCTIONS: [&str; 5] = ["sqrt", "exp", "sin", "cos", "conj"];

const ATOMS: [&str; 7] = ["a number", "`i`", "`pi`", "`I`", "a function", "`(`", "`[`"];

impl Cursor {
    /// A complex expression or a `re,im` pair of real expressions.
    pub(crate) fn amplitude(&mut self) -> Result<Complex64, DslError> {
        let start = self.pos();
        let a = self.scalar()?;
        if self.eat(',') {
            let b = self.scalar()?;
            if a.im != 0.0 || b.im != 0.0 {
                return Err(DslError::validation(
                    start,
                    "both parts of a `re,im` pair must be real",
                ));
            }
            return Ok(Complex64::new(a.re, b.re));
        }
        Ok(a)
    }

    pub(crate) fn scalar(&mut self) -> Result<Complex64, DslError> {
        self.skip_ws();
        let start = self.pos();
        self.operations = 0;
        match self.sum(0)? {
            Value::Scalar(c) => Ok(c),
            Value::Op(_) => Err(DslError::validation(
                start,
                "expected a number, found an operator expression",
            )),
        }
    }

    pub(crate) fn real_scalar(&mut self) -> Result<f64, DslError> {
        self.skip_ws();
        let start = self.pos();
        let c = self.scalar()?;
        if c.im != 0.0 {
            return Err(DslError::validation(start, "expected a real number"));
        }
        Ok(c.re)
    }

    pub(crate) fn operator(&mut self) -> Result<Expr, DslError> {
        self.skip_ws();
        self.operations = 0;
        Ok(as_op(self.sum(0)?))
    }

    fn count_operation(&mut self, at: Pos) -> Result<(), DslError> {
        self.operations += 1;
        if self.operations > MAX_OPERATIONS {
            return Err(DslError::validation(
                at,
                format!("expression has more than {MAX_OPERATIONS} operations"),
            ));
        }
        Ok(())
    }

    fn finite(&self, c: Complex64, at: Pos) -> Result<Complex64, DslError> {
        if c.re.is_finite() && c.im.is_finite() {
            Ok(c)
        } else {
            Err(DslError::validation(at, "value is not finite"))
        }
    }

    fn sum(&mut self, depth: usize) -> Result<Value, DslError> {
        let mut acc = self.product(depth)?;
        loop {
            self.skip_ws();
            let at = self.pos();
            let minus = match self.peek() {
                Some('+') => false,
                Some('-') => true,
                _ => return Ok(acc),
            };
            self.bump();
            self.count_operation(at)?;
            let rhs = self.product(depth)?;
            acc = match (acc, rhs) {
                (Value::Scalar(a), Value::Scalar(b)) => {
                    Value::Scalar(self.finite(if minus { a - b } else { a + b }, at)?)
                }
                (a, b) => {
                    let (a, b) = (Box::new(as_op(a)), Box::new(as_op(b)));
                    Value::Op(if minus {
                        Expr::Difference(a, b)
                    } else {
                        Expr::Sum(a, b)
                    })
                }
            };
        }
    }

    fn product(&mut self, depth: usize) -> Result<Value, DslError> {
        let mut acc = self.unary(depth)?;
        loop {
            self.skip_ws();
            let at = self.pos();
            let divide_by = match self.peek() {
                Some('*') => false,
                Some('/') => true,
                _ => return Ok(acc),
            };
            self.bump();
            self.count_operation(at)?;
            let rhs = self.unary(depth)?;
            acc = match (acc, rhs, divide_by) {
                (Value::Scalar(a), Value::Scalar(b), false) => Value::Scalar(self.finite(a * b, at)?),
                (Value::Scalar(a), Value::Scalar(b), true) => Value::Scalar(self.finite(divide(a, b), at)?),
                (Value::Scalar(c), Value::Op(e), false) | (Value::Op(e), Value::Scalar(c), false) => {
                    Value::Op(Expr::scaled(c, e))
                }
                (Value::Op(e), Value::Scalar(c), true) => {
                    let inv = self.finite(divide(real(1.0), c), at)?;
                    Value::Op(Expr::scaled(inv, e))
                }
                (Value::Op(a), Value::Op(b), false) => Value::Op(Expr::Product(Box::new(a), Box::new(b))),
                (_, Value::Op(_), true) => {
                    return Err(DslError::validation(at, "cannot divide by an operator"))
                }
            };
        }
    }

    fn unary(&mut self, depth: usize) -> Result<Value, DslError> {
        self.skip_ws();
        let at = self.pos();
        if depth > MAX_DEPTH {
            return Err(DslError::validation(
                at,
                format!("expression nested deeper than {MAX_DEPTH}"),
            ));
        }
        match self.peek() {
            Some('-') => {
                self.bump();
                Ok(match self.unary(depth + 1)? {
                    Value::Scalar(c) => Value::Scalar(-c),
                    Value::Op(e) => Value::Op(Expr::scaled(real(-1.0), e)),
                })
            }
            Some('+') => {
                self.bump();
                self.unary(depth + 1)
            }
            _ => self.atom(depth),
        }
    }

    fn atom(&mut self, depth: usize) -> Result<Value, DslError> {
        self.skip_ws();
        let at = self.pos();
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let x = self.number()?;
                Ok(Value::Scalar(self.finite(real(x), at)?))
            }
            Some('(') => {
                self.bump();
                let v = self.sum(depth + 1)?;
                self.expect(')', "`)`")?;
                Ok(v)
            }
            Some('[') => {
                self.bump();
                Ok(Value::Op(Expr::Projector(self.selections(Some(']'))?)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let name = self.ident().expect("peeked an identifier start");
                match name.as_str() {
                    "i" => Ok(Value::Scalar(Complex64::new(0.0, 1.0))),
                    "pi" => Ok(Value::Scalar(real(std::f64::consts::PI))),
                    "I" => Ok(Value::Op(Expr::Identity)),
                    f if FUNCTIONS.contains(&f) => {
                        self.expect('(', "`(`")?;
                        let arg_at = self.pos();
                        let v = self.sum(depth + 1)?;
                        self.expect(')', "`)`")?;
                        match v {
                            Value::Scalar(z) => Ok(Value::Scalar(self.finite(apply_function(f, z), at)?)),
                            Value::Op(_) => Err(DslError::validation(
                                arg_at,
                                format!("`{f}` takes a number, not an operator"),
                            )),
                        }
                    }
                    other => Err(DslError::syntax(at, &ATOMS, format!("`{other}`"))),
                }
            }
            _ => Err(DslError::syntax(at, &ATOMS, self.found())),
        }
    }

    fn number(&mut self) -> Result<f64, DslError> {
        let at = self.pos();
        let mut text = String::new();
        while let Some(c) = self.peek().filter(|c| c.is_ascii_digit() || *c == '.') {
            text.push(c);
            self.bump();
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let sign = matches!(self.peek_at(1), Some('+' | '-'));
            let digit_at = if sign { 2 } else { 1 };
            if self.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                for _ in 0..digit_at {
                    text.push(self.peek().expect("checked above"));
                    self.bump();
                }
                while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
                    text.push(c);
                    self.bump();
                }
            }
        }
        text.parse::<f64>()
            .map_err(|_| DslError::syntax(at, &["a number"], format!("`{text}`")))
    }

    /// `f=l1,l2 g=m ...` up to and including `close`, or to the end of the
    /// line when `close` is `None`.
    pub(crate) fn selections(&mut self, close: Option<char>) -> Result<Vec<Selection>, DslError> {
        let mut out: Vec<Selection> = Vec::new();
        loop {
            self.skip_ws();
            if !out.is_empty() {
                match close {
                    Some(c) if self.peek() == Some(c) => {
                        self.bump();
                        return Ok(out);
                    }
                    None if self.peek().is_none() => return Ok(out),
                    _ => {}
                }
            }
            let at = self.pos();
            let factor = self
                .ident()
                .ok_or_else(|| DslError::syntax(at, &["a factor name"], self.found()))?;
            if out.iter().any(|s| s.factor == factor) {
                return Err(DslError::validation(
                    at,
                    format!("factor `{factor}` selected twice"),
                ));
            }
            self.expect('=', "`=`")?;
            let mut labels = vec![self.expect_label()?];
            while self.eat(',') {
                labels.push(self.expect_label()?);
            }
            out.push(Selection { factor, labels });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(s: &str) -> Complex64 {
        let mut c = Cursor::new(1, s);
        let v = c.scalar().unwrap();
        assert!(c.at_end(), "trailing input in {s}");
        v
    }

    fn op(s: &str) -> Expr {
        let mut c = Cursor::new(1, s);
        let e = c.operator().unwrap();
        assert!(c.at_end(), "trailing input in {s}");
        e
    }

    #[test]
    fn arithmetic_matches_direct_evaluation() {
        assert!((scalar("1/sqrt(3)").re - 0.57735026919).abs() < 1e-9);
        assert_eq!(scalar("1/sqrt(3)").re, 1.0 / 3f64.sqrt());
        assert_eq!(scalar("-pi/2").re, -std::f64::consts::FRAC_PI_2);
        assert_eq!(scalar("-i/2"), Complex64::new(0.0, -0.5));
        assert_eq!(scalar("(1 + 2*i) * (3 - i)"), Complex64::new(5.0, 5.0));
        assert!((scalar("exp(i*pi)") + 1.0).norm() < 1e-15);
        assert_eq!(scalar("2.5e-3"), real(0.0025));
        assert_eq!(scalar("sqrt(-4)"), Complex64::new(0.0, 2.0));
        assert_eq!(scalar("--1"), real(1.0));
    }

    #[test]
    fn pairs_and_errors() {
        let mut c = Cursor::new(1, "0.5, -0.25");
        assert_eq!(c.amplitude().unwrap(), Complex64::new(0.5, -0.25));
        for bad in ["1/0", "1e400", "sqrt", "foo(1)", "(1", "1 +", "[box=1]", ")"] {
            let mut c = Cursor::new(1, bad);
            assert!(c.scalar().is_err(), "{bad}");
        }
        let mut c = Cursor::new(1, "i, 1");
        assert!(c.amplitude().is_err());
    }

    #[test]
    fn operators_fold_scalars() {
        let p = || {
            Expr::Projector(vec![Selection {
                factor: "box".into(),
                labels: vec!["1".into()],
            }])
        };
        assert_eq!(op("2 * (3 * [box=1])"), Expr::Scaled(real(6.0), Box::new(p())));
        assert_eq!(op("-[box=1]"), Expr::Scaled(real(-1.0), Box::new(p())));
        assert_eq!(op("[box=1] / 4"), Expr::Scaled(real(0.25), Box::new(p())));
        assert_eq!(op("1/2"), Expr::Scaled(real(0.5), Box::new(Expr::Identity)));
        assert!(matches!(op("I - [box=1]"), Expr::Difference(..)));
        assert!(matches!(op("[box=1] * [box=2]"), Expr::Product(..)));
        let mut c = Cursor::new(1, "1 / [box=1]");
        assert!(c.operator().is_err());
        let mut c = Cursor::new(1, "[box=1 box=2]");
        assert!(c.operator().is_err());
    }

    #[test]
    fn nesting_is_bounded() {
        let deep = format!("{}1{}", "(".repeat(500), ")".repeat(500));
        let mut c = Cursor::new(1, &deep);
        assert!(matches!(c.scalar(), Err(DslError::Validation { .. })));
        let long = vec!["1"; 2000].join("+");
        let mut c = Cursor::new(1, &long);
        assert!(c.scalar().is_err());
    }
}
