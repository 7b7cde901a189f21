use alloc::boxed::Box;

#[allow(unused_imports)]
use num_traits::Float;

use super::{BinOp, Func, Node};

fn num(v: f64) -> Node {
    Node::Num(v)
}

fn is_num(n: &Node, v: f64) -> bool {
    matches!(n, Node::Num(x) if *x == v)
}

fn add(a: Node, b: Node) -> Node {
    match (&a, &b) {
        (Node::Num(x), Node::Num(y)) => num(x + y),
        _ if is_num(&a, 0.0) => b,
        _ if is_num(&b, 0.0) => a,
        _ => Node::Binary(BinOp::Add, Box::new(a), Box::new(b)),
    }
}

fn sub(a: Node, b: Node) -> Node {
    match (&a, &b) {
        (Node::Num(x), Node::Num(y)) => num(x - y),
        _ if is_num(&b, 0.0) => a,
        _ if is_num(&a, 0.0) => neg(b),
        _ => Node::Binary(BinOp::Sub, Box::new(a), Box::new(b)),
    }
}

fn mul(a: Node, b: Node) -> Node {
    match (&a, &b) {
        (Node::Num(x), Node::Num(y)) => num(x * y),
        _ if is_num(&a, 0.0) || is_num(&b, 0.0) => num(0.0),
        _ if is_num(&a, 1.0) => b,
        _ if is_num(&b, 1.0) => a,
        _ => Node::Binary(BinOp::Mul, Box::new(a), Box::new(b)),
    }
}

fn div(a: Node, b: Node) -> Node {
    match (&a, &b) {
        (Node::Num(x), Node::Num(y)) if *y != 0.0 => num(x / y),
        _ if is_num(&a, 0.0) => num(0.0),
        _ if is_num(&b, 1.0) => a,
        _ => Node::Binary(BinOp::Div, Box::new(a), Box::new(b)),
    }
}

fn pow(a: Node, b: Node) -> Node {
    match (&a, &b) {
        _ if is_num(&b, 0.0) => num(1.0),
        _ if is_num(&b, 1.0) => a,
        (Node::Num(x), Node::Num(y)) if x.powf(*y).is_finite() && *x > 0.0 => num(x.powf(*y)),
        _ => Node::Binary(BinOp::Pow, Box::new(a), Box::new(b)),
    }
}

fn neg(a: Node) -> Node {
    match a {
        Node::Num(x) => num(-x),
        Node::Neg(inner) => *inner,
        other => Node::Neg(Box::new(other)),
    }
}

fn call(f: Func, a: Node) -> Node {
    Node::Call(f, Box::new(a))
}

/// Structural derivative of `node` with respect to variable `var`.
pub(super) fn derivative(node: &Node, var: usize) -> Node {
    match node {
        Node::Num(_) | Node::Const(_) => num(0.0),
        Node::Var(i) => num(if *i == var { 1.0 } else { 0.0 }),
        Node::Neg(a) => neg(derivative(a, var)),
        Node::Binary(op, a, b) => {
            let (u, v) = (a.as_ref(), b.as_ref());
            match op {
                BinOp::Add => add(derivative(u, var), derivative(v, var)),
                BinOp::Sub => sub(derivative(u, var), derivative(v, var)),
                BinOp::Mul => add(
                    mul(derivative(u, var), v.clone()),
                    mul(u.clone(), derivative(v, var)),
                ),
                BinOp::Div => div(
                    sub(
                        mul(derivative(u, var), v.clone()),
                        mul(u.clone(), derivative(v, var)),
                    ),
                    pow(v.clone(), num(2.0)),
                ),
                BinOp::Pow => {
                    let du = derivative(u, var);
                    if !v.depends_on(var) {
                        // v u^(v-1) u'
                        let lowered = match v {
                            Node::Num(k) => num(k - 1.0),
                            _ => sub(v.clone(), num(1.0)),
                        };
                        mul(mul(v.clone(), pow(u.clone(), lowered)), du)
                    } else if !u.depends_on(var) {
                        // u^v ln(u) v'
                        mul(
                            mul(node.clone(), call(Func::Log, u.clone())),
                            derivative(v, var),
                        )
                    } else {
                        // u^v (v' ln u + v u'/u)
                        mul(
                            node.clone(),
                            add(
                                mul(derivative(v, var), call(Func::Log, u.clone())),
                                div(mul(v.clone(), du), u.clone()),
                            ),
                        )
                    }
                }
            }
        }
        Node::Call(f, a) => {
            let u = a.as_ref();
            let du = derivative(u, var);
            if is_num(&du, 0.0) {
                return num(0.0);
            }
            let outer = match f {
                Func::Sin => call(Func::Cos, u.clone()),
                Func::Cos => neg(call(Func::Sin, u.clone())),
                Func::Tan => div(num(1.0), pow(call(Func::Cos, u.clone()), num(2.0))),
                Func::Exp => call(Func::Exp, u.clone()),
                Func::Log => div(num(1.0), u.clone()),
                Func::Sqrt => div(num(1.0), mul(num(2.0), call(Func::Sqrt, u.clone()))),
                Func::Abs => call(Func::Sign, u.clone()),
                Func::Atan => div(num(1.0), add(num(1.0), pow(u.clone(), num(2.0)))),
                Func::Sign => return num(0.0),
            };
            mul(outer, du)
        }
    }
}
