//! Ideographic description sequences.
//!
//! An IDS is written in prefix notation: an ideographic description
//! character (IDC) is followed by its operands, each of which is either a
//! single component codepoint or another IDS. Because every IDC has a fixed
//! arity the notation is self-delimiting and needs no brackets.

use std::fmt;

use thiserror::Error;

/// First codepoint of the Ideographic Description Characters block.
pub const IDC_FIRST: char = '\u{2FF0}';
/// Last codepoint of the block accepted as an operator.
pub const IDC_LAST: char = '\u{2FFB}';

/// Returns the number of operands taken by `c`, or `None` if `c` is not an IDC.
///
/// `⿲` and `⿳` are ternary, every other IDC is binary.
pub fn idc_arity(c: char) -> Option<usize> {
    match c {
        '\u{2FF2}' | '\u{2FF3}' => Some(3),
        IDC_FIRST..=IDC_LAST => Some(2),
        _ => None,
    }
}

pub fn is_idc(c: char) -> bool {
    idc_arity(c).is_some()
}

/// Iterator over every accepted IDC.
pub fn all_idcs() -> impl Iterator<Item = char> {
    (IDC_FIRST as u32..=IDC_LAST as u32).filter_map(char::from_u32)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdsError {
    #[error("empty description sequence")]
    Empty,
    #[error("operator {op} at offset {offset} expects {expected} operands, found {found}")]
    MissingOperand {
        op: char,
        offset: usize,
        expected: usize,
        found: usize,
    },
    #[error("trailing material after complete sequence at offset {offset}")]
    Trailing { offset: usize },
}

/// Decomposition tree of one character.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdsTree {
    Leaf(char),
    Compound { op: char, children: Vec<IdsTree> },
}

impl IdsTree {
    /// Parses a complete sequence; anything left over is an error.
    pub fn parse(s: &str) -> Result<Self, IdsError> {
        let chars: Vec<char> = s.chars().collect();
        if chars.is_empty() {
            return Err(IdsError::Empty);
        }
        let (tree, used) = Self::parse_prefix(&chars)?;
        if used != chars.len() {
            return Err(IdsError::Trailing { offset: used });
        }
        Ok(tree)
    }

    /// Parses one tree from the front of `chars` and reports how many
    /// codepoints it consumed.
    pub fn parse_prefix(chars: &[char]) -> Result<(Self, usize), IdsError> {
        let mut pos = 0;
        let tree = parse_at(chars, &mut pos)?;
        Ok((tree, pos))
    }

    pub fn leaf(c: char) -> Self {
        IdsTree::Leaf(c)
    }

    pub fn compound(op: char, children: Vec<IdsTree>) -> Self {
        IdsTree::Compound { op, children }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, IdsTree::Leaf(_))
    }

    pub fn depth(&self) -> usize {
        match self {
            IdsTree::Leaf(_) => 1,
            IdsTree::Compound { children, .. } => {
                1 + children.iter().map(IdsTree::depth).max().unwrap_or(0)
            }
        }
    }

    /// Leaf components in left-to-right order.
    pub fn leaves(&self) -> Vec<char> {
        let mut out = Vec::new();
        self.visit(&mut |node| {
            if let IdsTree::Leaf(c) = node {
                out.push(*c);
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<F: FnMut(&IdsTree)>(&self, f: &mut F) {
        f(self);
        if let IdsTree::Compound { children, .. } = self {
            for child in children {
                child.visit(f);
            }
        }
    }

    /// Replaces every leaf by the tree `expand` returns for it.
    pub fn map_leaves<E, F>(&self, expand: &mut F) -> Result<IdsTree, E>
    where
        F: FnMut(char) -> Result<IdsTree, E>,
    {
        match self {
            IdsTree::Leaf(c) => expand(*c),
            IdsTree::Compound { op, children } => {
                let children = children
                    .iter()
                    .map(|child| child.map_leaves(expand))
                    .collect::<Result<Vec<_>, E>>()?;
                Ok(IdsTree::Compound { op: *op, children })
            }
        }
    }

    /// Writes the prefix form. When `with_idcs` is false only the leaves are
    /// written; `leaf` maps each leaf to its surface form.
    pub fn write_flat<F>(&self, with_idcs: bool, out: &mut Vec<char>, leaf: &mut F)
    where
        F: FnMut(char, &mut Vec<char>),
    {
        match self {
            IdsTree::Leaf(c) => leaf(*c, out),
            IdsTree::Compound { op, children } => {
                if with_idcs {
                    out.push(*op);
                }
                for child in children {
                    child.write_flat(with_idcs, out, leaf);
                }
            }
        }
    }
}

fn parse_at(chars: &[char], pos: &mut usize) -> Result<IdsTree, IdsError> {
    let start = *pos;
    let c = *chars.get(start).ok_or(IdsError::Empty)?;
    *pos += 1;
    let Some(arity) = idc_arity(c) else {
        return Ok(IdsTree::Leaf(c));
    };
    let mut children = Vec::with_capacity(arity);
    for found in 0..arity {
        if *pos >= chars.len() {
            return Err(IdsError::MissingOperand {
                op: c,
                offset: start,
                expected: arity,
                found,
            });
        }
        children.push(parse_at(chars, pos)?);
    }
    Ok(IdsTree::Compound { op: c, children })
}

impl fmt::Display for IdsTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdsTree::Leaf(c) => write!(f, "{c}"),
            IdsTree::Compound { op, children } => {
                write!(f, "{op}")?;
                for child in children {
                    write!(f, "{child}")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn arities() {
        assert_eq!(all_idcs().count(), 12);
        assert_eq!(idc_arity('⿲'), Some(3));
        assert_eq!(idc_arity('⿳'), Some(3));
        assert_eq!(idc_arity('⿰'), Some(2));
        assert_eq!(idc_arity('⿻'), Some(2));
        assert_eq!(idc_arity('好'), None);
    }

    #[test]
    fn parses_binary() {
        let t = IdsTree::parse("⿰女子").unwrap();
        assert_eq!(
            t,
            IdsTree::compound('⿰', vec![IdsTree::leaf('女'), IdsTree::leaf('子')])
        );
        assert_eq!(t.leaves(), vec!['女', '子']);
        assert_eq!(t.depth(), 2);
    }

    #[test]
    fn parses_nested() {
        let t = IdsTree::parse("⿱木⿰木木").unwrap();
        assert_eq!(t.to_string(), "⿱木⿰木木");
        assert_eq!(t.depth(), 3);
    }

    #[test]
    fn bare_leaf() {
        assert_eq!(IdsTree::parse("女").unwrap(), IdsTree::Leaf('女'));
    }

    #[test]
    fn ternary_missing_operand() {
        let err = IdsTree::parse("⿲AB").unwrap_err();
        assert_eq!(
            err,
            IdsError::MissingOperand {
                op: '⿲',
                offset: 0,
                expected: 3,
                found: 2
            }
        );
    }

    #[test]
    fn trailing_tokens() {
        assert_eq!(
            IdsTree::parse("⿰AB C").unwrap_err(),
            IdsError::Trailing { offset: 3 }
        );
        assert_eq!(IdsTree::parse("").unwrap_err(), IdsError::Empty);
    }

    #[test]
    fn flat_without_idcs() {
        let t = IdsTree::parse("⿱木⿰木口").unwrap();
        let mut out = Vec::new();
        t.write_flat(false, &mut out, &mut |c, o| o.push(c));
        assert_eq!(out.iter().collect::<String>(), "木木口");
    }

    fn arb_tree() -> impl Strategy<Value = IdsTree> {
        let leaf = prop::sample::select(vec!['口', '木', '日', '女', '子', '①'])
            .prop_map(IdsTree::Leaf);
        leaf.prop_recursive(4, 32, 3, |inner| {
            (
                prop::sample::select(all_idcs().collect::<Vec<_>>()),
                prop::collection::vec(inner, 3),
            )
                .prop_map(|(op, mut kids)| {
                    kids.truncate(idc_arity(op).unwrap());
                    IdsTree::Compound { op, children: kids }
                })
        })
    }

    proptest! {
        #[test]
        fn parse_serialize_roundtrip(tree in arb_tree()) {
            let text = tree.to_string();
            prop_assert_eq!(IdsTree::parse(&text).unwrap(), tree);
        }
    }
}
