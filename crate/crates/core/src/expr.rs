//! Scalar arithmetic expressions over named variables.
//!
//! Expressions are parsed by recursive descent and evaluated with forward-mode
//! dual numbers, so every evaluation can carry one exact directional
//! derivative alongside the value.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          right-associative
//! atom    := number | variable | func '(' sum ')' | '(' sum ')'
//! func    := sin | cos | exp | log | sqrt
//! ```

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("undeclared variable `{name}` at offset {position}")]
    UndeclaredVariable { name: String, position: usize },
    #[error("domain error in `{subexpression}`: {message}")]
    Domain {
        message: String,
        subexpression: String,
    },
    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),
    #[error("expected {expected} values, got {got}")]
    EnvironmentSize { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, ExprError>;

/// A value paired with a directional derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub deriv: f64,
}

impl Dual {
    pub fn new(value: f64, deriv: f64) -> Self {
        Self { value, deriv }
    }

    pub fn constant(value: f64) -> Self {
        Self { value, deriv: 0.0 }
    }

    pub fn sin(self) -> Self {
        Self::new(self.value.sin(), self.deriv * self.value.cos())
    }

    pub fn cos(self) -> Self {
        Self::new(self.value.cos(), -self.deriv * self.value.sin())
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        Self::new(e, self.deriv * e)
    }

    /// Natural logarithm; the caller checks the argument is positive.
    pub fn ln(self) -> Self {
        Self::new(self.value.ln(), self.deriv / self.value)
    }

    /// Square root; the caller checks the argument is positive.
    pub fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        Self::new(r, self.deriv / (2.0 * r))
    }

    pub fn powi(self, k: i32) -> Self {
        if k == 0 {
            return Self::constant(1.0);
        }
        Self::new(
            self.value.powi(k),
            k as f64 * self.value.powi(k - 1) * self.deriv,
        )
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.value + rhs.value, self.deriv + rhs.deriv)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.value - rhs.value, self.deriv - rhs.deriv)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(
            self.value * rhs.value,
            self.deriv * rhs.value + self.value * rhs.deriv,
        )
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, rhs: Dual) -> Dual {
        Dual::new(
            self.value / rhs.value,
            (self.deriv * rhs.value - self.value * rhs.deriv) / (rhs.value * rhs.value),
        )
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.value, -self.deriv)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Syntax tree. Variables are indices into the owning [`Expr`]'s
/// variable list.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression together with its declared variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    variables: Vec<String>,
    root: Node,
}

impl Expr {
    /// Parses `text`; every identifier must be one of `variables`.
    pub fn parse<S: AsRef<str>>(text: &str, variables: &[S]) -> Result<Expr> {
        let variables: Vec<String> = variables.iter().map(|v| v.as_ref().to_string()).collect();
        let root = Parser::new(text, &variables).parse()?;
        Ok(Expr { variables, root })
    }

    /// Builds an expression from a tree. Panics if the tree references a
    /// variable index outside `variables`.
    pub fn from_node(variables: Vec<String>, root: Node) -> Expr {
        fn max_var(node: &Node) -> Option<usize> {
            match node {
                Node::Num(_) => None,
                Node::Var(i) => Some(*i),
                Node::Neg(a) | Node::Call(_, a) => max_var(a),
                Node::Binary(_, a, b) => max_var(a).max(max_var(b)),
            }
        }
        if let Some(i) = max_var(&root) {
            assert!(i < variables.len(), "variable index {i} not declared");
        }
        Expr { variables, root }
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    /// `factor * (self)`.
    pub fn scaled(&self, factor: f64) -> Expr {
        Expr {
            variables: self.variables.clone(),
            root: Node::Binary(
                BinOp::Mul,
                Box::new(Node::Num(factor)),
                Box::new(self.root.clone()),
            ),
        }
    }

    /// Evaluates with `env[i]` bound to the `i`-th declared variable.
    pub fn eval(&self, env: &[f64]) -> Result<f64> {
        self.check_env(env)?;
        let seed = vec![0.0; env.len()];
        Ok(self.eval_node(&self.root, env, &seed)?.value)
    }

    /// Value and directional derivative `∇e(env) · seed`.
    pub fn directional(&self, env: &[f64], seed: &[f64]) -> Result<(f64, f64)> {
        self.check_env(env)?;
        self.check_env(seed)?;
        let d = self.eval_node(&self.root, env, seed)?;
        Ok((d.value, d.deriv))
    }

    /// Partial derivative with respect to the `var`-th declared variable.
    pub fn partial(&self, var: usize, env: &[f64]) -> Result<f64> {
        self.check_env(env)?;
        let mut seed = vec![0.0; env.len()];
        if var < seed.len() {
            seed[var] = 1.0;
        }
        Ok(self.eval_node(&self.root, env, &seed)?.deriv)
    }

    pub fn eval_named(&self, env: &HashMap<String, f64>) -> Result<f64> {
        self.eval(&self.bind(env)?)
    }

    pub fn directional_named(
        &self,
        env: &HashMap<String, f64>,
        seed: &HashMap<String, f64>,
    ) -> Result<(f64, f64)> {
        self.directional(&self.bind(env)?, &self.bind(seed)?)
    }

    /// Partial derivative by name. A name the expression does not declare has
    /// derivative zero.
    pub fn partial_named(&self, var: &str, env: &HashMap<String, f64>) -> Result<f64> {
        let env = self.bind(env)?;
        match self.variable_index(var) {
            Some(i) => self.partial(i, &env),
            None => Ok(0.0),
        }
    }

    fn bind(&self, env: &HashMap<String, f64>) -> Result<Vec<f64>> {
        self.variables
            .iter()
            .map(|v| {
                env.get(v)
                    .copied()
                    .ok_or_else(|| ExprError::UnboundVariable(v.clone()))
            })
            .collect()
    }

    fn check_env(&self, env: &[f64]) -> Result<()> {
        if env.len() != self.variables.len() {
            return Err(ExprError::EnvironmentSize {
                expected: self.variables.len(),
                got: env.len(),
            });
        }
        Ok(())
    }

    fn domain(&self, node: &Node, message: impl Into<String>) -> ExprError {
        ExprError::Domain {
            message: message.into(),
            subexpression: Printer {
                node,
                vars: &self.variables,
            }
            .to_string(),
        }
    }

    fn eval_node(&self, node: &Node, env: &[f64], seed: &[f64]) -> Result<Dual> {
        let out = match node {
            Node::Num(x) => Dual::constant(*x),
            Node::Var(i) => Dual::new(env[*i], seed[*i]),
            Node::Neg(a) => -self.eval_node(a, env, seed)?,
            Node::Binary(op, a, b) => {
                let x = self.eval_node(a, env, seed)?;
                let y = self.eval_node(b, env, seed)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y.value == 0.0 {
                            return Err(self.domain(node, "division by zero"));
                        }
                        x / y
                    }
                    BinOp::Pow => self.power(node, x, y)?,
                }
            }
            Node::Call(f, a) => {
                let x = self.eval_node(a, env, seed)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x.value <= 0.0 {
                            return Err(
                                self.domain(node, format!("log of non-positive value {}", x.value))
                            );
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x.value < 0.0 {
                            return Err(
                                self.domain(node, format!("sqrt of negative value {}", x.value))
                            );
                        }
                        if x.value == 0.0 {
                            if x.deriv != 0.0 {
                                return Err(self.domain(node, "sqrt is not differentiable at 0"));
                            }
                            Dual::constant(0.0)
                        } else {
                            x.sqrt()
                        }
                    }
                }
            }
        };
        if !out.value.is_finite() || !out.deriv.is_finite() {
            return Err(self.domain(node, "non-finite result"));
        }
        Ok(out)
    }

    fn power(&self, node: &Node, base: Dual, exponent: Dual) -> Result<Dual> {
        let b = exponent.value;
        let integral = exponent.deriv == 0.0 && b.fract() == 0.0 && b.abs() <= i32::MAX as f64;
        if integral {
            let k = b as i32;
            if base.value == 0.0 && k < 0 {
                return Err(self.domain(node, "zero raised to a negative power"));
            }
            return Ok(base.powi(k));
        }
        if base.value > 0.0 {
            let value = base.value.powf(b);
            let deriv = value * (exponent.deriv * base.value.ln() + b * base.deriv / base.value);
            return Ok(Dual::new(value, deriv));
        }
        if base.value == 0.0 && exponent.deriv == 0.0 && b > 0.0 {
            // 0^b with b > 0 non-integer: derivative only finite for b > 1
            if b > 1.0 || base.deriv == 0.0 {
                return Ok(Dual::constant(0.0));
            }
            return Err(self.domain(node, "power not differentiable at base 0"));
        }
        Err(self.domain(
            node,
            format!("non-integer power {b} of non-positive base {}", base.value),
        ))
    }
}

/// Fully parenthesised printing; the output re-parses to the same tree shape
/// and the same values.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer {
            node: &self.root,
            vars: &self.variables,
        }
        .fmt(f)
    }
}

struct Printer<'a> {
    node: &'a Node,
    vars: &'a [String],
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |node| Printer {
            node,
            vars: self.vars,
        };
        match self.node {
            Node::Num(x) if *x < 0.0 => write!(f, "(-{})", -x),
            Node::Num(x) => write!(f, "{x}"),
            Node::Var(i) => f.write_str(&self.vars[*i]),
            Node::Neg(a) => write!(f, "(-{})", sub(a)),
            Node::Binary(op, a, b) => write!(f, "({} {} {})", sub(a), op.symbol(), sub(b)),
            Node::Call(func, a) => write!(f, "{}({})", func.name(), sub(a)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
    text: &'a str,
    variables: &'a [String],
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, variables: &'a [String]) -> Self {
        Parser {
            tokens: Vec::new(),
            pos: 0,
            end: text.len(),
            text,
            variables,
        }
    }

    fn parse(mut self) -> Result<Node> {
        self.tokens = tokenize(self.text)?;
        if self.tokens.is_empty() {
            return Err(ExprError::Syntax {
                position: 0,
                message: "empty expression".into(),
            });
        }
        let node = self.sum()?;
        if let Some((tok, at)) = self.tokens.get(self.pos) {
            return Err(ExprError::Syntax {
                position: *at,
                message: format!("unexpected {}", describe(tok)),
            });
        }
        Ok(node)
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(_, at)| *at)
    }

    fn next(&mut self) -> Option<(Token, usize)> {
        let tok = self.tokens.get(self.pos).cloned();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn sum(&mut self) -> Result<Node> {
        let mut lhs = self.product()?;
        while let Some(Token::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.pos += 1;
            let rhs = self.product()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        if let Some(Token::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let at = self.offset();
        match self.next() {
            Some((Token::Num(x), _)) => Ok(Node::Num(x)),
            Some((Token::Ident(name), at)) => {
                if let Some(func) = Func::from_name(&name) {
                    if let Some(Token::LParen) = self.peek() {
                        self.pos += 1;
                        let arg = self.sum()?;
                        self.expect_close()?;
                        return Ok(Node::Call(func, Box::new(arg)));
                    }
                }
                match self.variables.iter().position(|v| *v == name) {
                    Some(i) => Ok(Node::Var(i)),
                    None => Err(ExprError::UndeclaredVariable { name, position: at }),
                }
            }
            Some((Token::LParen, _)) => {
                let inner = self.sum()?;
                self.expect_close()?;
                Ok(inner)
            }
            Some((tok, at)) => Err(ExprError::Syntax {
                position: at,
                message: format!("expected an operand, found {}", describe(&tok)),
            }),
            None => Err(ExprError::Syntax {
                position: at,
                message: "expected an operand, found end of input".into(),
            }),
        }
    }

    fn expect_close(&mut self) -> Result<()> {
        let at = self.offset();
        match self.next() {
            Some((Token::RParen, _)) => Ok(()),
            Some((tok, at)) => Err(ExprError::Syntax {
                position: at,
                message: format!("expected `)`, found {}", describe(&tok)),
            }),
            None => Err(ExprError::Syntax {
                position: at,
                message: "expected `)`, found end of input".into(),
            }),
        }
    }
}

fn describe(tok: &Token) -> String {
    match tok {
        Token::Num(x) => format!("number {x}"),
        Token::Ident(s) => format!("`{s}`"),
        Token::Op(c) => format!("`{c}`"),
        Token::LParen => "`(`".into(),
        Token::RParen => "`)`".into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push((Token::Op(c as char), i));
                i += 1;
            }
            b'(' => {
                out.push((Token::LParen, i));
                i += 1;
            }
            b')' => {
                out.push((Token::RParen, i));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let value = lit.parse::<f64>().map_err(|_| ExprError::Syntax {
                    position: start,
                    message: format!("malformed number `{lit}`"),
                })?;
                out.push((Token::Num(value), start));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Token::Ident(text[start..i].to_string()), start));
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ExprError::Syntax {
                    position: i,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TUV: [&str; 3] = ["t", "u1", "v1"];

    fn env(v1: f64) -> [f64; 3] {
        [0.0, 0.0, v1]
    }

    #[test]
    fn parses_the_quadratic_and_quartic_lagrangians() {
        let sq = Expr::parse("v1^2", &TUV).unwrap();
        assert_eq!(
            sq.root(),
            &Node::Binary(BinOp::Pow, Box::new(Node::Var(2)), Box::new(Node::Num(2.0)))
        );
        assert_eq!(sq.eval(&env(3.0)).unwrap(), 9.0);

        let quartic = Expr::parse("(v1^2 - 1)^2", &TUV).unwrap();
        assert_eq!(quartic.eval(&env(0.0)).unwrap(), 1.0);
        assert_eq!(quartic.eval(&env(-1.0)).unwrap(), 0.0);
    }

    #[test]
    fn precedence_and_associativity() {
        let vars = ["x"];
        let cases = [
            ("2^3^2", 512.0),
            ("-2^2", -4.0),
            ("2^-1", 0.5),
            ("1 - 2 - 3", -4.0),
            ("8 / 4 / 2", 1.0),
            ("1 + 2 * 3", 7.0),
            ("-x*3", -6.0),
            ("  ( 1+x ) *x", 6.0),
            ("1.5e1 + 2E-1", 15.2),
        ];
        for (text, want) in cases {
            let e = Expr::parse(text, &vars).unwrap();
            assert_eq!(e.eval(&[2.0]).unwrap(), want, "{text}");
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert_eq!(
            Expr::parse("v1 +", &TUV),
            Err(ExprError::Syntax {
                position: 4,
                message: "expected an operand, found end of input".into()
            })
        );
        assert!(matches!(
            Expr::parse("(v1", &TUV),
            Err(ExprError::Syntax { position: 3, .. })
        ));
        assert!(matches!(
            Expr::parse("v1 v1", &TUV),
            Err(ExprError::Syntax { position: 3, .. })
        ));
        assert!(matches!(
            Expr::parse("v1 # 2", &TUV),
            Err(ExprError::Syntax { position: 3, .. })
        ));
        assert!(matches!(
            Expr::parse("   ", &TUV),
            Err(ExprError::Syntax { .. })
        ));
        let err = Expr::parse("v1 + w2", &TUV).unwrap_err();
        assert_eq!(
            err,
            ExprError::UndeclaredVariable {
                name: "w2".into(),
                position: 5
            }
        );
        assert!(err.to_string().contains("w2"));
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let e = Expr::parse("1 + log(u1)", &TUV).unwrap();
        match e.eval(&[0.0, 0.0, 0.0]) {
            Err(ExprError::Domain { subexpression, .. }) => assert_eq!(subexpression, "log(u1)"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            Expr::parse("1 / u1", &TUV).unwrap().eval(&[0.0; 3]),
            Err(ExprError::Domain { .. })
        ));
        assert!(matches!(
            Expr::parse("u1 ^ (-2)", &TUV).unwrap().eval(&[0.0; 3]),
            Err(ExprError::Domain { .. })
        ));
        assert!(matches!(
            Expr::parse("u1 ^ 0.5", &TUV)
                .unwrap()
                .eval(&[0.0, -1.0, 0.0]),
            Err(ExprError::Domain { .. })
        ));
        assert!(matches!(
            Expr::parse("sqrt(u1)", &TUV)
                .unwrap()
                .eval(&[0.0, -1.0, 0.0]),
            Err(ExprError::Domain { .. })
        ));
    }

    #[test]
    fn integer_powers_of_negative_bases() {
        let e = Expr::parse("v1^3 + v1^2", &TUV).unwrap();
        assert_eq!(e.eval(&env(-2.0)).unwrap(), -4.0);
        assert_eq!(e.partial(2, &env(-2.0)).unwrap(), 12.0 - 4.0);
    }

    #[test]
    fn directional_derivatives() {
        let sq = Expr::parse("v1^2", &TUV).unwrap();
        assert_eq!(
            sq.directional(&env(3.0), &[0.0, 0.0, 1.0]).unwrap(),
            (9.0, 6.0)
        );
        assert_eq!(sq.partial(2, &env(1.5)).unwrap(), 3.0);
        assert_eq!(sq.partial(0, &env(1.5)).unwrap(), 0.0);

        let second_el = Expr::parse("(v1^2-1)*(1+3*v1^2)", &TUV).unwrap();
        assert_eq!(
            second_el.directional(&env(1.0), &[0.0, 0.0, 1.0]).unwrap(),
            (0.0, 8.0)
        );

        let uv = Expr::parse("u1*v1", &TUV).unwrap();
        assert_eq!(uv.partial(1, &[0.0, 2.0, 5.0]).unwrap(), 5.0);

        let any = Expr::parse("sin(t)*exp(u1) + sqrt(v1)", &TUV).unwrap();
        assert_eq!(any.directional(&[0.3, 0.2, 4.0], &[0.0; 3]).unwrap().1, 0.0);
    }

    #[test]
    fn named_interfaces() {
        let e = Expr::parse("u1*v1 + t", &TUV).unwrap();
        let env: HashMap<String, f64> = [("t", 1.0), ("u1", 2.0), ("v1", 5.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        assert_eq!(e.eval_named(&env).unwrap(), 11.0);
        assert_eq!(e.partial_named("u1", &env).unwrap(), 5.0);
        assert_eq!(e.partial_named("q7", &env).unwrap(), 0.0);
        let mut short = env.clone();
        short.remove("t");
        assert_eq!(
            e.eval_named(&short),
            Err(ExprError::UnboundVariable("t".into()))
        );
    }

    #[test]
    fn printing_reparses() {
        let e = Expr::parse("-(v1^2 - 1)^2 / exp(-t) + 3 * -u1", &TUV).unwrap();
        let printed = e.to_string();
        let back = Expr::parse(&printed, &TUV).unwrap();
        let point = [0.4, -1.3, 0.7];
        assert_eq!(e.eval(&point).unwrap(), back.eval(&point).unwrap());
        assert_eq!(
            Expr::from_node(vec![], Node::Num(-0.5)).to_string(),
            "(-0.5)"
        );
    }

    #[test]
    fn scaled_multiplies_values_and_derivatives() {
        let e = Expr::parse("v1^2 + u1", &TUV).unwrap();
        let s = e.scaled(10.0);
        let p = [0.0, 2.0, 3.0];
        assert_eq!(s.eval(&p).unwrap(), 110.0);
        assert_eq!(s.partial(2, &p).unwrap(), 60.0);
    }
}
