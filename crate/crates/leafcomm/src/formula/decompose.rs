//! √s-decomposition by bottom-up peeling.
//!
//! `decompose(f, t)` repeatedly peels the deepest subtree that contains at
//! least `t` original gate leaves while staying within `2t` total leaves
//! (placeholders from earlier peels included), replacing it with a fresh
//! placeholder.  Ties between equally deep candidates go to the leftmost.
//! Every peel consumes at least `t` gate leaves, so at most `⌈s/t⌉` pieces
//! are produced, and the size filter caps each piece at `2t` leaves.

use super::{Formula, FormulaError, GateId, Node, PieceLeaf};

/// Result of peeling: a top formula over placeholders (and any unpeeled
/// gates) plus the ordered pieces.  Piece `i` defines placeholder `i` and may
/// itself reference placeholders `j < i`.
#[derive(Debug, Clone)]
pub struct CompositionTree {
    pub top: Node<PieceLeaf>,
    pub pieces: Vec<Node<PieceLeaf>>,
    pub threshold: usize,
}

impl CompositionTree {
    /// Substitute the pieces back bottom-up, recovering a gate-leaf tree that
    /// must compute the same function as the original formula.
    pub fn recompose(&self) -> Node<GateId> {
        fn subst(node: &Node<PieceLeaf>, pieces: &[Node<PieceLeaf>]) -> Node<GateId> {
            node.map_leaves(&mut |leaf| match leaf {
                PieceLeaf::Gate(g) => Node::Leaf(*g),
                PieceLeaf::Placeholder(j) => subst(&pieces[*j], pieces),
            })
        }
        subst(&self.top, &self.pieces)
    }

    /// Leaf count of each piece (gate leaves plus placeholder leaves).
    pub fn piece_sizes(&self) -> Vec<usize> {
        self.pieces.iter().map(|p| p.size()).collect()
    }
}

struct Candidate {
    /// Path from the root: false = left/only child, true = right child.
    path: Vec<bool>,
    depth: usize,
}

/// Count (gate leaves, total leaves) and record the deepest-leftmost
/// candidate subtree.
fn scan(
    node: &Node<PieceLeaf>,
    t: usize,
    depth: usize,
    path: &mut Vec<bool>,
    best: &mut Option<Candidate>,
) -> (usize, usize) {
    let (orig, total) = match node {
        Node::And(a, b) | Node::Or(a, b) => {
            path.push(false);
            let (oa, ta) = scan(a, t, depth + 1, path, best);
            path.pop();
            path.push(true);
            let (ob, tb) = scan(b, t, depth + 1, path, best);
            path.pop();
            (oa + ob, ta + tb)
        }
        Node::Not(c) => {
            path.push(false);
            let r = scan(c, t, depth + 1, path, best);
            path.pop();
            r
        }
        Node::Leaf(PieceLeaf::Gate(_)) => (1, 1),
        Node::Leaf(PieceLeaf::Placeholder(_)) => (0, 1),
    };
    // NOT nodes never win over their child (same counts, smaller depth), so
    // candidates are effectively AND/OR nodes or bare gate leaves.
    if orig >= t && total <= 2 * t {
        let better = match best {
            None => true,
            Some(c) => depth > c.depth,
        };
        if better {
            *best = Some(Candidate { path: path.clone(), depth });
        }
    }
    (orig, total)
}

fn replace_at(node: &mut Node<PieceLeaf>, path: &[bool], placeholder: usize) -> Node<PieceLeaf> {
    if path.is_empty() {
        return std::mem::replace(node, Node::Leaf(PieceLeaf::Placeholder(placeholder)));
    }
    match node {
        Node::And(a, b) | Node::Or(a, b) => {
            if path[0] {
                replace_at(b, &path[1..], placeholder)
            } else {
                replace_at(a, &path[1..], placeholder)
            }
        }
        Node::Not(c) => replace_at(c, &path[1..], placeholder),
        Node::Leaf(_) => unreachable!("candidate path walks internal nodes"),
    }
}

/// Run the peeling loop on an existing mixed-leaf tree, appending new
/// pieces; used by `decompose` and by pipelines that re-peel a residue.
pub(crate) fn decompose_node(top: &mut Node<PieceLeaf>, t: usize, pieces: &mut Vec<Node<PieceLeaf>>) {
    loop {
        let mut best = None;
        let mut path = Vec::new();
        // Leftmost wins ties because left subtrees are scanned first and
        // later candidates must be strictly deeper to replace the best.
        scan(top, t, 0, &mut path, &mut best);
        match best {
            None => break,
            Some(c) => {
                let piece = replace_at(top, &c.path, pieces.len());
                pieces.push(piece);
            }
        }
    }
}

/// Peel `f` into a [`CompositionTree`] with threshold `t`.
pub fn decompose(f: &Formula, t: usize) -> Result<CompositionTree, FormulaError> {
    let size = f.size();
    if t == 0 || t > size {
        return Err(FormulaError::BadThreshold { t, size });
    }
    let mut top: Node<PieceLeaf> = f.root.map_leaves(&mut |g| Node::Leaf(PieceLeaf::Gate(*g)));
    let mut pieces: Vec<Node<PieceLeaf>> = Vec::new();
    decompose_node(&mut top, t, &mut pieces);
    Ok(CompositionTree { top, pieces, threshold: t })
}
