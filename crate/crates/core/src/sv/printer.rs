//! Pretty printer for [`ModuleAst`]. Output re-parses to the same tree.

use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "    ";

pub fn print_module(m: &ModuleAst) -> String {
    let mut out = String::new();
    let _ = write!(out, "module {}", m.name);
    if m.ports.is_empty() {
        out.push_str("();\n");
    } else {
        out.push_str("(\n");
        let n = m.ports.len();
        for (i, p) in m.ports.iter().enumerate() {
            out.push_str(INDENT);
            out.push_str(match p.direction {
                Direction::Input => "input ",
                Direction::Output => "output ",
            });
            if let Some(k) = p.kind.keyword() {
                out.push_str(k);
                out.push(' ');
            }
            if let Some(r) = &p.range {
                out.push_str(&print_range(r));
                out.push(' ');
            }
            out.push_str(&p.name);
            if i + 1 < n {
                out.push(',');
            }
            if let Some(c) = &p.comment {
                let _ = write!(out, " // {c}");
            }
            out.push('\n');
        }
        out.push_str(");\n");
    }
    for item in &m.items {
        out.push('\n');
        print_item(&mut out, item);
    }
    out.push_str("\nendmodule\n");
    out
}

fn print_item(out: &mut String, item: &Item) {
    match item {
        Item::Param(p) => {
            out.push_str(INDENT);
            out.push_str(if p.local { "localparam " } else { "parameter " });
            if let Some(k) = p.kind.keyword() {
                out.push_str(k);
                out.push(' ');
            }
            if let Some(r) = &p.range {
                out.push_str(&print_range(r));
                out.push(' ');
            }
            let parts: Vec<String> = p
                .assigns
                .iter()
                .map(|a| format!("{} = {}", a.name, print_expr(&a.value)))
                .collect();
            out.push_str(&parts.join(", "));
            out.push_str(";\n");
        }
        Item::TypedefEnum(t) => {
            let _ = writeln!(out, "{INDENT}typedef {} {};", print_enum(&t.ty), t.name);
        }
        Item::Net(d) => {
            out.push_str(INDENT);
            out.push_str(&print_net_decl(d));
            out.push('\n');
        }
        Item::Assign(a) => {
            let _ = writeln!(out, "{INDENT}assign {} = {};", print_expr(&a.lhs), print_expr(&a.rhs));
        }
        Item::Process(p) => {
            out.push_str(INDENT);
            match p.kind {
                ProcessKind::AlwaysComb => out.push_str("always_comb "),
                ProcessKind::AlwaysStar => out.push_str("always @(*) "),
                ProcessKind::AlwaysFf | ProcessKind::AlwaysEdge => {
                    out.push_str(if p.kind == ProcessKind::AlwaysFf {
                        "always_ff @("
                    } else {
                        "always @("
                    });
                    let parts: Vec<String> = p
                        .sensitivity
                        .iter()
                        .map(|s| {
                            let e = match s.edge {
                                Edge::Pos => "posedge ",
                                Edge::Neg => "negedge ",
                                Edge::Level => "",
                            };
                            format!("{e}{}", s.signal)
                        })
                        .collect();
                    out.push_str(&parts.join(" or "));
                    out.push_str(") ");
                }
            }
            print_stmt(out, &p.body, 1, true);
        }
    }
}

fn print_enum(e: &EnumType) -> String {
    let mut s = String::from("enum ");
    if let Some((k, r)) = &e.base {
        if let Some(kw) = k.keyword() {
            s.push_str(kw);
            s.push(' ');
        }
        if let Some(r) = r {
            s.push_str(&print_range(r));
            s.push(' ');
        }
    }
    let members: Vec<String> = e
        .members
        .iter()
        .map(|m| match &m.value {
            Some(v) => format!("{} = {}", m.name, print_expr(v)),
            None => m.name.clone(),
        })
        .collect();
    let _ = write!(s, "{{{}}}", members.join(", "));
    s
}

fn print_net_decl(d: &NetDecl) -> String {
    let mut s = match &d.ty {
        DataType::Net { kind, range } => {
            let mut s = kind.keyword().unwrap_or("logic").to_string();
            if let Some(r) = range {
                s.push(' ');
                s.push_str(&print_range(r));
            }
            s
        }
        DataType::Named(n) => n.clone(),
        DataType::Enum(e) => print_enum(e),
    };
    s.push(' ');
    let names: Vec<String> = d
        .names
        .iter()
        .map(|n| match &n.init {
            Some(e) => format!("{} = {}", n.name, print_expr(e)),
            None => n.name.clone(),
        })
        .collect();
    s.push_str(&names.join(", "));
    s.push(';');
    s
}

fn print_range(r: &Range) -> String {
    format!("[{}:{}]", print_expr(&r.msb), print_expr(&r.lsb))
}

fn pad(level: usize) -> String {
    INDENT.repeat(level)
}

/// Prints `s`; `inline` means the caller already emitted the indentation.
fn print_stmt(out: &mut String, s: &Stmt, level: usize, inline: bool) {
    if !inline {
        out.push_str(&pad(level));
    }
    match s {
        Stmt::Block {
            label,
            decls,
            stmts,
        } => {
            out.push_str("begin");
            if let Some(l) = label {
                let _ = write!(out, " : {l}");
            }
            out.push('\n');
            for d in decls {
                let _ = writeln!(out, "{}{}", pad(level + 1), print_net_decl(d));
            }
            for st in stmts {
                print_stmt(out, st, level + 1, false);
            }
            let _ = writeln!(out, "{}end", pad(level));
        }
        Stmt::If {
            cond, then, els, ..
        } => {
            let _ = write!(out, "if ({}) ", print_expr(cond));
            print_stmt(out, then, level, true);
            if let Some(e) = els {
                let _ = write!(out, "{}else ", pad(level));
                print_stmt(out, e, level, true);
            }
        }
        Stmt::Case {
            kind,
            selector,
            arms,
            default,
            ..
        } => {
            let kw = match kind {
                CaseKind::Case => "case",
                CaseKind::Casez => "casez",
            };
            let _ = writeln!(out, "{kw} ({})", print_expr(selector));
            for arm in arms {
                let labels: Vec<String> = arm.labels.iter().map(print_expr).collect();
                let _ = write!(out, "{}{}: ", pad(level + 1), labels.join(", "));
                print_stmt(out, &arm.body, level + 1, true);
            }
            if let Some(d) = default {
                let _ = write!(out, "{}default: ", pad(level + 1));
                print_stmt(out, d, level + 1, true);
            }
            let _ = writeln!(out, "{}endcase", pad(level));
        }
        Stmt::Blocking { lhs, rhs, .. } => {
            let _ = writeln!(out, "{} = {};", print_expr(lhs), print_expr(rhs));
        }
        Stmt::Nonblocking { lhs, rhs, .. } => {
            let _ = writeln!(out, "{} <= {};", print_expr(lhs), print_expr(rhs));
        }
        Stmt::Null => out.push_str(";\n"),
    }
}

fn is_atomic(e: &Expr) -> bool {
    matches!(
        e.kind,
        ExprKind::Ref(_)
            | ExprKind::Literal(_)
            | ExprKind::Concat(_)
            | ExprKind::Replicate(..)
            | ExprKind::BitSelect(..)
            | ExprKind::PartSelect { .. }
            | ExprKind::IndexedPartSelect { .. }
    )
}

fn atom(e: &Expr) -> String {
    if is_atomic(e) {
        print_expr(e)
    } else {
        format!("({})", print_expr(e))
    }
}

/// Prints an expression with explicit parentheses around every compound
/// operand.
pub fn print_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Ref(n) => n.clone(),
        ExprKind::Literal(l) => l.text.clone(),
        ExprKind::BitSelect(b, i) => format!("{}[{}]", atom(b), print_expr(i)),
        ExprKind::PartSelect { base, msb, lsb } => {
            format!("{}[{}:{}]", atom(base), print_expr(msb), print_expr(lsb))
        }
        ExprKind::IndexedPartSelect {
            base,
            start,
            width,
            ascending,
        } => format!(
            "{}[{} {} {}]",
            atom(base),
            print_expr(start),
            if *ascending { "+:" } else { "-:" },
            print_expr(width)
        ),
        ExprKind::Concat(items) => {
            let parts: Vec<String> = items.iter().map(print_expr).collect();
            format!("{{{}}}", parts.join(", "))
        }
        ExprKind::Replicate(n, items) => {
            let parts: Vec<String> = items.iter().map(print_expr).collect();
            format!("{{{}{{{}}}}}", atom(n), parts.join(", "))
        }
        ExprKind::Unary(op, x) => format!("{}{}", op.symbol(), atom(x)),
        ExprKind::Binary(op, a, b) => format!("{} {} {}", atom(a), op.symbol(), atom(b)),
        ExprKind::Ternary(c, t, f) => format!("{} ? {} : {}", atom(c), atom(t), atom(f)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sv::parser::parse_source;

    #[test]
    fn round_trip_preserves_tree() {
        let src = r#"module top_module(
    input clk,
    input areset, // async
    input [1:0] s,
    output logic [3:0] y);
    localparam logic [1:0] A = 2'd0, B = 2'd1;
    typedef enum logic [1:0] {S0, S1 = 2'd2} st_t;
    st_t st;
    wire w = &s;
    always_ff @(posedge clk or posedge areset)
        if (areset) st <= S0;
        else if (s[0] && !s[1]) st <= S1;
        else st <= st;
    always @(*) begin : comb
        logic t;
        t = ~(s[1] ^ w);
        casez (s)
            2'b1?, 2'b01: y = {2{t, 1'b0}};
            default: y = {s, s[1:0]} + 4'd1;
        endcase
    end
endmodule
"#;
        let mut a = parse_source(src).unwrap().module;
        let printed = print_module(&a);
        let mut b = parse_source(&printed).unwrap().module;
        a.strip_positions();
        b.strip_positions();
        assert_eq!(a, b, "{printed}");
    }
}
