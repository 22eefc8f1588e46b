//! Minimal S-expression reader for solver responses.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            Sexp::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(xs) => Some(xs),
            Sexp::Atom(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError(pub String);

/// Parses every top-level expression; bare atoms such as `sat` are kept.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    while i < chars.len() {
        let c = chars[i];
        match c {
            ';' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                stack.push(Vec::new());
                i += 1;
            }
            ')' => {
                let done =
                    stack.pop().filter(|_| !stack.is_empty()).ok_or_else(|| ParseError("unbalanced ')'".into()))?;
                stack.last_mut().unwrap().push(Sexp::List(done));
                i += 1;
            }
            '"' | '|' => {
                let close = c;
                let start = i;
                i += 1;
                while i < chars.len() && chars[i] != close {
                    i += 1;
                }
                if i == chars.len() {
                    return Err(ParseError(format!("unterminated {close}")));
                }
                i += 1;
                let tok: String = chars[start..i].iter().collect();
                let tok = if close == '|' { tok.trim_matches('|').to_string() } else { tok };
                stack.last_mut().unwrap().push(Sexp::Atom(tok));
            }
            c if c.is_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !"();\"|".contains(chars[i]) {
                    i += 1;
                }
                stack.last_mut().unwrap().push(Sexp::Atom(chars[start..i].iter().collect()));
            }
        }
    }
    if stack.len() != 1 {
        return Err(ParseError("unbalanced '('".into()));
    }
    Ok(stack.pop().unwrap())
}
