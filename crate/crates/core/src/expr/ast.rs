use std::fmt;

/// Unary function tags understood by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Atan,
    Exp,
    Log,
    Sqrt,
    Neg,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Atan => "atan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Neg => "neg",
        }
    }

    /// Looks up a callable function by identifier. `neg` is only reachable
    /// through unary minus.
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "atan" => Func::Atan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Expression tree over chart variables `u1..um`.
///
/// Variable indices are stored zero-based; `Var(0)` prints as `u1`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Unary(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    /// Zero-based variable.
    pub fn var(index: usize) -> Expr {
        Expr::Var(index)
    }

    pub fn unary(f: Func, arg: Expr) -> Expr {
        Expr::Unary(f, Box::new(arg))
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Largest variable index referenced (one-based), 0 for closed expressions.
    pub fn max_variable(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Unary(_, a) => a.max_variable(),
            Expr::Binary(_, a, b) => a.max_variable().max(b.max_variable()),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.max_variable() == 0
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) => 1 + a.node_count(),
            Expr::Binary(_, a, b) => 1 + a.node_count() + b.node_count(),
        }
    }
}

// Printing is fully parenthesized so that reparsing is structurally exact.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.is_sign_negative() {
                    write!(f, "-({})", -c)
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Var(i) => write!(f, "u{}", i + 1),
            Expr::Unary(Func::Neg, a) => write!(f, "-({a})"),
            Expr::Unary(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}
