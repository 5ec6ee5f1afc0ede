//! Textual IR parser.
//!
//! Accepts the reduced generic form the printer emits (plus `//` comments).
//! Parsing stops at the first error and reports it with line/column. Operand
//! references must resolve to values defined earlier in the same block, in an
//! enclosing block, or as block/function arguments, and the declared operand
//! types in the trailing type signature must match the definitions, so a
//! successfully parsed module is well-typed by construction.

use std::collections::HashMap;

use super::{
    Attribute, Block, DiagLoc, Diagnostic, Dim, Function, Module, Op, Region, ScalarKind, Type,
    Value,
};

pub fn parse_module(text: &str) -> Result<Module, Vec<Diagnostic>> {
    let tokens = lex(text).map_err(|d| vec![d])?;
    let mut parser = Parser { tokens, pos: 0 };
    parser.parse_module().map_err(|d| vec![d])
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Percent(String),
    Caret(String),
    At(String),
    Int(i64),
    Float(f64),
    Str(String),
    /// `memref<...>` / `tile<...>` captured whole by the lexer.
    TypeLit(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Equals,
    Colon,
    Arrow,
    Dot,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: u32,
    col: u32,
}

fn err(message: impl Into<String>, line: u32, col: u32) -> Diagnostic {
    Diagnostic::error_at(message, line, col)
}

fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! push {
        ($tok:expr, $line:expr, $col:expr) => {
            tokens.push(Token { tok: $tok, line: $line, col: $col })
        };
    }

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut advance = |i: &mut usize, line: &mut u32, col: &mut u32| {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                advance(&mut i, &mut line, &mut col);
            }
            '/' if i + 1 < chars.len() && chars[i + 1] == '/' => {
                while i < chars.len() && chars[i] != '\n' {
                    advance(&mut i, &mut line, &mut col);
                }
            }
            '{' => {
                push!(Tok::LBrace, tl, tc);
                advance(&mut i, &mut line, &mut col);
            }
            '}' => {
                push!(Tok::RBrace, tl, tc);
                advance(&mut i, &mut line, &mut col);
            }
            '(' => {
                push!(Tok::LParen, tl, tc);
                advance(&mut i, &mut line, &mut col);
            }
            ')' => {
                push!(Tok::RParen, tl, tc);
                advance(&mut i, &mut line, &mut col);
            }
            '[' => {
                push!(Tok::LBracket, tl, tc);
                advance(&mut i, &mut line, &mut col);
            }
            ']' => {
                push!(Tok::RBracket, tl, tc);
                advance(&mut i, &mut line, &mut col);
            }
            ',' => {
                push!(Tok::Comma, tl, tc);
                advance(&mut i, &mut line, &mut col);
            }
            '=' => {
                push!(Tok::Equals, tl, tc);
                advance(&mut i, &mut line, &mut col);
            }
            ':' => {
                push!(Tok::Colon, tl, tc);
                advance(&mut i, &mut line, &mut col);
            }
            '.' => {
                push!(Tok::Dot, tl, tc);
                advance(&mut i, &mut line, &mut col);
            }
            '%' | '^' | '@' => {
                advance(&mut i, &mut line, &mut col);
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    advance(&mut i, &mut line, &mut col);
                }
                if i == start {
                    return Err(err(format!("expected identifier after '{}'", c), tl, tc));
                }
                let name: String = chars[start..i].iter().collect();
                let tok = match c {
                    '%' => Tok::Percent(name),
                    '^' => Tok::Caret(name),
                    _ => Tok::At(name),
                };
                push!(tok, tl, tc);
            }
            '"' => {
                advance(&mut i, &mut line, &mut col);
                let mut s = String::new();
                loop {
                    if i >= chars.len() {
                        return Err(err("unterminated string literal", tl, tc));
                    }
                    match chars[i] {
                        '"' => {
                            advance(&mut i, &mut line, &mut col);
                            break;
                        }
                        '\\' => {
                            advance(&mut i, &mut line, &mut col);
                            if i >= chars.len() {
                                return Err(err("unterminated string escape", tl, tc));
                            }
                            let esc = chars[i];
                            advance(&mut i, &mut line, &mut col);
                            match esc {
                                '"' => s.push('"'),
                                '\\' => s.push('\\'),
                                'n' => s.push('\n'),
                                't' => s.push('\t'),
                                other => {
                                    return Err(err(
                                        format!("unknown string escape '\\{}'", other),
                                        tl,
                                        tc,
                                    ))
                                }
                            }
                        }
                        c => {
                            s.push(c);
                            advance(&mut i, &mut line, &mut col);
                        }
                    }
                }
                push!(Tok::Str(s), tl, tc);
            }
            '-' => {
                // "->", negative number, or -inf
                advance(&mut i, &mut line, &mut col);
                if i < chars.len() && chars[i] == '>' {
                    advance(&mut i, &mut line, &mut col);
                    push!(Tok::Arrow, tl, tc);
                } else if i < chars.len() && chars[i].is_ascii_digit() {
                    let tok = lex_number(&chars, &mut i, &mut line, &mut col, true)
                        .map_err(|m| err(m, tl, tc))?;
                    push!(tok, tl, tc);
                } else if chars[i..].starts_with(&['i', 'n', 'f']) {
                    for _ in 0..3 {
                        advance(&mut i, &mut line, &mut col);
                    }
                    push!(Tok::Float(f64::NEG_INFINITY), tl, tc);
                } else {
                    return Err(err("unexpected '-'", tl, tc));
                }
            }
            c if c.is_ascii_digit() => {
                let tok = lex_number(&chars, &mut i, &mut line, &mut col, false)
                    .map_err(|m| err(m, tl, tc))?;
                push!(tok, tl, tc);
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    advance(&mut i, &mut line, &mut col);
                }
                let name: String = chars[start..i].iter().collect();
                if (name == "memref" || name == "tile") && i < chars.len() && chars[i] == '<' {
                    let lit_start = start;
                    while i < chars.len() && chars[i] != '>' {
                        advance(&mut i, &mut line, &mut col);
                    }
                    if i >= chars.len() {
                        return Err(err("unterminated type literal", tl, tc));
                    }
                    advance(&mut i, &mut line, &mut col); // consume '>'
                    let lit: String = chars[lit_start..i].iter().collect();
                    push!(Tok::TypeLit(lit), tl, tc);
                } else if name == "inf" {
                    push!(Tok::Float(f64::INFINITY), tl, tc);
                } else if name == "nan" {
                    push!(Tok::Float(f64::NAN), tl, tc);
                } else {
                    push!(Tok::Ident(name), tl, tc);
                }
            }
            other => return Err(err(format!("unexpected character '{}'", other), tl, tc)),
        }
    }
    tokens.push(Token { tok: Tok::Eof, line, col });
    Ok(tokens)
}

fn lex_number(
    chars: &[char],
    i: &mut usize,
    line: &mut u32,
    col: &mut u32,
    negative: bool,
) -> Result<Tok, String> {
    let start = *i;
    let mut is_float = false;
    while *i < chars.len() {
        let c = chars[*i];
        if c.is_ascii_digit() {
            *col += 1;
            *i += 1;
        } else if c == '.' || c == 'e' || c == 'E' {
            is_float = true;
            *col += 1;
            *i += 1;
            // exponent sign
            if (c == 'e' || c == 'E') && *i < chars.len() && (chars[*i] == '+' || chars[*i] == '-')
            {
                *col += 1;
                *i += 1;
            }
        } else {
            break;
        }
    }
    let text: String = chars[start..*i].iter().collect();
    let text = if negative { format!("-{}", text) } else { text };
    if is_float {
        text.parse::<f64>().map(Tok::Float).map_err(|_| format!("bad float literal '{}'", text))
    } else {
        text.parse::<i64>().map(Tok::Int).map_err(|_| format!("bad integer literal '{}'", text))
    }
}

/// Lexical scope stack mapping value names to definitions.
struct Scopes {
    frames: Vec<HashMap<String, Value>>,
}

impl Scopes {
    fn new() -> Scopes {
        Scopes { frames: vec![] }
    }

    fn push(&mut self) {
        self.frames.push(HashMap::new());
    }

    fn pop(&mut self) {
        self.frames.pop();
    }

    fn define(&mut self, name: &str, value: Value) -> bool {
        let frame = self.frames.last_mut().expect("scope underflow");
        frame.insert(name.to_string(), value).is_none()
    }

    fn resolve(&self, name: &str) -> Option<&Value> {
        self.frames.iter().rev().find_map(|f| f.get(name))
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        let idx = (self.pos + 1).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    fn here(&self) -> (u32, u32) {
        let t = &self.tokens[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let tok = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), Diagnostic> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            let (line, col) = self.here();
            Err(err(format!("expected {}", what), line, col))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, Diagnostic> {
        let (line, col) = self.here();
        match self.bump() {
            Tok::Ident(name) => Ok(name),
            _ => Err(err(format!("expected {}", what), line, col)),
        }
    }

    fn parse_module(&mut self) -> Result<Module, Diagnostic> {
        let (line, col) = self.here();
        let kw = self.expect_ident("'module'")?;
        if kw != "module" {
            return Err(err("expected 'module'", line, col));
        }
        let mut module = Module::new();
        if self.at_attrs() {
            module.attrs = self.parse_attrs()?;
        }
        self.expect(Tok::LBrace, "'{'")?;
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Ident(name) if name == "func" => {
                    let func = self.parse_func()?;
                    module.functions.push(func);
                }
                _ => {
                    let (line, col) = self.here();
                    return Err(err("expected 'func' or '}'", line, col));
                }
            }
        }
        let (line, col) = self.here();
        if *self.peek() != Tok::Eof {
            return Err(err("trailing input after module", line, col));
        }
        Ok(module)
    }

    /// True when the upcoming `{` opens an attribute dict rather than a
    /// region or body: `{ ident =` is the only attribute opener (empty
    /// attribute dicts are never printed).
    fn at_attrs(&self) -> bool {
        if *self.peek() != Tok::LBrace {
            return false;
        }
        matches!(self.peek2(), Tok::Ident(_))
            && matches!(
                &self.tokens.get(self.pos + 2).map(|t| &t.tok),
                Some(Tok::Equals)
            )
    }

    fn parse_func(&mut self) -> Result<Function, Diagnostic> {
        self.bump(); // 'func'
        let (line, col) = self.here();
        let name = match self.bump() {
            Tok::At(name) => name,
            _ => return Err(err("expected '@name' after 'func'", line, col)),
        };
        let mut func = Function::new(&name);
        let mut scopes = Scopes::new();
        scopes.push();
        self.expect(Tok::LParen, "'('")?;
        if *self.peek() != Tok::RParen {
            loop {
                let (line, col) = self.here();
                let pname = match self.bump() {
                    Tok::Percent(n) => n,
                    _ => return Err(err("expected '%name' parameter", line, col)),
                };
                self.expect(Tok::Colon, "':'")?;
                let ty = self.parse_type()?;
                let value = func.add_param(ty);
                if !scopes.define(&pname, value) {
                    return Err(err(
                        format!("duplicate value name '%{}' within a block", pname),
                        line,
                        col,
                    ));
                }
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "')'")?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let ty = self.parse_type()?;
            func.results.push(ty);
        }
        if self.at_attrs() {
            func.attrs = self.parse_attrs()?;
        }
        self.expect(Tok::LBrace, "'{'")?;
        // Entry block: unlabeled, args are the parameters (already in scope).
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Caret(_) => {
                    let block = self.parse_labeled_block(&mut func, &mut scopes)?;
                    func.region.blocks.push(block);
                }
                _ => {
                    let op = self.parse_op(&mut func, &mut scopes)?;
                    func.region.blocks[0].ops.push(op);
                }
            }
        }
        scopes.pop();
        Ok(func)
    }

    fn parse_labeled_block(
        &mut self,
        func: &mut Function,
        scopes: &mut Scopes,
    ) -> Result<Block, Diagnostic> {
        self.bump(); // label
        let mut block = Block::default();
        scopes.push();
        if *self.peek() == Tok::LParen {
            self.bump();
            if *self.peek() != Tok::RParen {
                loop {
                    let (line, col) = self.here();
                    let aname = match self.bump() {
                        Tok::Percent(n) => n,
                        _ => return Err(err("expected '%name' block argument", line, col)),
                    };
                    self.expect(Tok::Colon, "':'")?;
                    let ty = self.parse_type()?;
                    let value = func.fresh(ty);
                    block.args.push(value.clone());
                    if !scopes.define(&aname, value) {
                        return Err(err(
                            format!("duplicate value name '%{}' within a block", aname),
                            line,
                            col,
                        ));
                    }
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen, "')'")?;
        }
        self.expect(Tok::Colon, "':'")?;
        while !matches!(self.peek(), Tok::RBrace | Tok::Caret(_)) {
            let op = self.parse_op(func, scopes)?;
            block.ops.push(op);
        }
        scopes.pop();
        Ok(block)
    }

    fn parse_op(&mut self, func: &mut Function, scopes: &mut Scopes) -> Result<Op, Diagnostic> {
        // results
        let mut result_names: Vec<(String, u32, u32)> = Vec::new();
        if matches!(self.peek(), Tok::Percent(_)) {
            loop {
                let (line, col) = self.here();
                match self.bump() {
                    Tok::Percent(name) => result_names.push((name, line, col)),
                    _ => return Err(err("expected result name", line, col)),
                }
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect(Tok::Equals, "'='")?;
        }
        let (op_line, op_col) = self.here();
        let dialect = self.expect_ident("dialect name")?;
        self.expect(Tok::Dot, "'.'")?;
        let opname = self.expect_ident("op name")?;
        let mut op = Op::new(&dialect, &opname);

        // operands
        self.expect(Tok::LParen, "'('")?;
        let mut operand_names: Vec<(String, u32, u32)> = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let (line, col) = self.here();
                match self.bump() {
                    Tok::Percent(name) => operand_names.push((name, line, col)),
                    _ => return Err(err("expected operand '%name'", line, col)),
                }
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "')'")?;

        if self.at_attrs() {
            op.attrs = self.parse_attrs()?;
        }
        while *self.peek() == Tok::LBrace {
            let region = self.parse_region(func, scopes)?;
            op.regions.push(region);
        }

        self.expect(Tok::Colon, "':'")?;
        let (operand_types, result_types) = self.parse_typesig()?;

        if operand_types.len() != operand_names.len() {
            return Err(err(
                format!(
                    "operand count ({}) does not match type signature ({})",
                    operand_names.len(),
                    operand_types.len()
                ),
                op_line,
                op_col,
            ));
        }
        if result_types.len() != result_names.len() {
            return Err(err(
                format!(
                    "result count ({}) does not match type signature ({})",
                    result_names.len(),
                    result_types.len()
                ),
                op_line,
                op_col,
            ));
        }

        for ((name, line, col), declared) in operand_names.iter().zip(&operand_types) {
            let value = scopes
                .resolve(name)
                .ok_or_else(|| err(format!("undefined value '%{}'", name), *line, *col))?;
            if value.ty != *declared {
                return Err(err(
                    format!(
                        "operand '%{}' has type {} but signature declares {}",
                        name, value.ty, declared
                    ),
                    *line,
                    *col,
                ));
            }
            op.operands.push(value.id);
        }
        for ((name, line, col), ty) in result_names.iter().zip(result_types.iter()) {
            let value = func.fresh(ty.clone());
            op.results.push(value.clone());
            if !scopes.define(name, value) {
                return Err(err(
                    format!("duplicate value name '%{}' within a block", name),
                    *line,
                    *col,
                ));
            }
        }
        Ok(op)
    }

    fn parse_region(&mut self, func: &mut Function, scopes: &mut Scopes) -> Result<Region, Diagnostic> {
        self.expect(Tok::LBrace, "'{'")?;
        let mut region = Region::default();
        // Optional unlabeled first block.
        if !matches!(self.peek(), Tok::Caret(_) | Tok::RBrace) {
            let mut block = Block::default();
            scopes.push();
            while !matches!(self.peek(), Tok::RBrace | Tok::Caret(_)) {
                let op = self.parse_op(func, scopes)?;
                block.ops.push(op);
            }
            scopes.pop();
            region.blocks.push(block);
        }
        while matches!(self.peek(), Tok::Caret(_)) {
            let block = self.parse_labeled_block(func, scopes)?;
            region.blocks.push(block);
        }
        self.expect(Tok::RBrace, "'}'")?;
        if region.blocks.is_empty() {
            region.blocks.push(Block::default());
        }
        Ok(region)
    }

    fn parse_typesig(&mut self) -> Result<(Vec<Type>, Vec<Type>), Diagnostic> {
        let operands = self.parse_type_list()?;
        self.expect(Tok::Arrow, "'->'")?;
        let results = self.parse_type_list()?;
        Ok((operands, results))
    }

    fn parse_type_list(&mut self) -> Result<Vec<Type>, Diagnostic> {
        self.expect(Tok::LParen, "'('")?;
        let mut types = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                types.push(self.parse_type()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "')'")?;
        Ok(types)
    }

    fn parse_type(&mut self) -> Result<Type, Diagnostic> {
        let (line, col) = self.here();
        match self.bump() {
            Tok::Ident(name) => match name.as_str() {
                "f32" => Ok(Type::F32),
                "i32" => Ok(Type::I32),
                "i1" => Ok(Type::I1),
                "index" => Ok(Type::Index),
                "none" => Ok(Type::None),
                other => Err(err(format!("unknown type kind '{}'", other), line, col)),
            },
            Tok::TypeLit(lit) => parse_type_literal(&lit).map_err(|m| err(m, line, col)),
            _ => Err(err("expected type", line, col)),
        }
    }

    fn parse_attrs(&mut self) -> Result<super::AttrMap, Diagnostic> {
        self.expect(Tok::LBrace, "'{'")?;
        let mut attrs = super::AttrMap::new();
        if *self.peek() != Tok::RBrace {
            loop {
                let (line, col) = self.here();
                let key = self.expect_ident("attribute key")?;
                self.expect(Tok::Equals, "'='")?;
                let value = self.parse_attr_value()?;
                if attrs.insert(key.clone(), value).is_some() {
                    return Err(err(format!("duplicate attribute key '{}'", key), line, col));
                }
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace, "'}'")?;
        Ok(attrs)
    }

    fn parse_attr_value(&mut self) -> Result<Attribute, Diagnostic> {
        let (line, col) = self.here();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Attribute::Int(v))
            }
            Tok::Float(v) => {
                self.bump();
                Ok(Attribute::Float(v))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Attribute::Str(s))
            }
            Tok::At(s) => {
                self.bump();
                Ok(Attribute::Sym(s))
            }
            Tok::LBracket => {
                self.bump();
                let mut items = Vec::new();
                if *self.peek() != Tok::RBracket {
                    loop {
                        items.push(self.parse_attr_value()?);
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBracket, "']'")?;
                Ok(Attribute::Array(items))
            }
            Tok::LBrace => {
                let map = self.parse_attrs()?;
                let mut entries = std::collections::BTreeMap::new();
                for (k, v) in map {
                    entries.insert(k, v);
                }
                Ok(Attribute::Map(entries))
            }
            _ => Err(err("expected attribute value", line, col)),
        }
    }
}

fn parse_type_literal(lit: &str) -> Result<Type, String> {
    if let Some(body) = lit.strip_prefix("tile<").and_then(|s| s.strip_suffix('>')) {
        return match body {
            "f32" => Ok(Type::Tile(ScalarKind::F32)),
            other => Err(format!("unknown tile element kind '{}'", other)),
        };
    }
    let body = lit
        .strip_prefix("memref<")
        .and_then(|s| s.strip_suffix('>'))
        .ok_or_else(|| format!("unknown type kind '{}'", lit))?;
    let mut rest = body;
    let mut shape = Vec::new();
    loop {
        if let Some(tail) = rest.strip_prefix("?x") {
            shape.push(Dim::Dynamic);
            rest = tail;
            continue;
        }
        let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
        if !digits.is_empty() && rest[digits.len()..].starts_with('x') {
            let n: u64 = digits.parse().map_err(|_| format!("bad dimension '{}'", digits))?;
            if n == 0 {
                return Err("memref dimensions must be positive".to_string());
            }
            shape.push(Dim::Fixed(n));
            rest = &rest[digits.len() + 1..];
            continue;
        }
        break;
    }
    if shape.is_empty() {
        return Err(format!("memref type '{}' has no shape", lit));
    }
    let elem = match rest {
        "f32" => ScalarKind::F32,
        "i32" => ScalarKind::I32,
        "i1" => ScalarKind::I1,
        "index" => ScalarKind::Index,
        other => return Err(format!("unknown memref element kind '{}'", other)),
    };
    Ok(Type::Memref { shape, elem })
}
