use super::alphabet::{Symbol, ALPHABET_SIZE};

/// Which of the five count models a table holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    Unigram,
    Bigram,
    Trigram,
    Word,
    Biword,
}

impl Level {
    pub const ALL: [Level; 5] = [
        Level::Unigram,
        Level::Bigram,
        Level::Trigram,
        Level::Word,
        Level::Biword,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Level::Unigram => "unigram",
            Level::Bigram => "bigram",
            Level::Trigram => "trigram",
            Level::Word => "word",
            Level::Biword => "biword",
        }
    }

    pub fn from_name(name: &str) -> Option<Level> {
        Level::ALL.into_iter().find(|l| l.name() == name)
    }
}

#[derive(Clone, Debug, Default)]
struct Node {
    count: u64,
    /// Sorted by symbol index.
    children: Vec<(u8, u32)>,
}

/// Prefix-count table stored as a trie.
///
/// `count(x)` is the summed frequency of every entry that begins with `x`;
/// the root holds the table total.
#[derive(Clone, Debug)]
pub struct CountTable {
    level: Level,
    nodes: Vec<Node>,
}

/// Statistics of one context node: its count and the counts of each follower.
pub(crate) struct ContextView<'a> {
    pub count: u64,
    table: &'a CountTable,
    children: &'a [(u8, u32)],
}

impl ContextView<'_> {
    pub fn distinct_followers(&self) -> usize {
        self.children.len()
    }

    pub fn followers(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.children
            .iter()
            .map(|&(sym, node)| (sym as usize, self.table.nodes[node as usize].count))
    }

    pub fn follower_count(&self, sym: usize) -> u64 {
        self.children
            .binary_search_by_key(&(sym as u8), |&(s, _)| s)
            .map(|i| self.table.nodes[self.children[i].1 as usize].count)
            .unwrap_or(0)
    }
}

impl CountTable {
    pub fn new(level: Level) -> Self {
        CountTable {
            level,
            nodes: vec![Node::default()],
        }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn total(&self) -> u64 {
        self.nodes[0].count
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Add `n` occurrences of `key`, crediting every prefix (root included).
    /// Keys must only hold alphabet bytes.
    pub(crate) fn add(&mut self, key: &[u8], n: u64) {
        let mut cur = 0usize;
        self.nodes[0].count += n;
        for &b in key {
            let sym = Symbol::from_byte(b).expect("alphabet byte").index() as u8;
            cur = self.child_or_insert(cur, sym);
            self.nodes[cur].count += n;
        }
    }

    /// Set the count stored at `key`, creating intermediate nodes with zero count.
    pub(crate) fn set(&mut self, key: &[u8], n: u64) -> bool {
        let mut cur = 0usize;
        for &b in key {
            let Some(sym) = Symbol::from_byte(b) else {
                return false;
            };
            cur = self.child_or_insert(cur, sym.index() as u8);
        }
        self.nodes[cur].count = n;
        true
    }

    fn child_or_insert(&mut self, parent: usize, sym: u8) -> usize {
        match self.nodes[parent]
            .children
            .binary_search_by_key(&sym, |&(s, _)| s)
        {
            Ok(i) => self.nodes[parent].children[i].1 as usize,
            Err(i) => {
                let id = self.nodes.len();
                self.nodes.push(Node::default());
                self.nodes[parent].children.insert(i, (sym, id as u32));
                id
            }
        }
    }

    fn find(&self, key: &[u8]) -> Option<usize> {
        let mut cur = 0usize;
        for &b in key {
            let sym = Symbol::from_byte(b)?.index() as u8;
            let children = &self.nodes[cur].children;
            let i = children.binary_search_by_key(&sym, |&(s, _)| s).ok()?;
            cur = children[i].1 as usize;
        }
        Some(cur)
    }

    /// Prefix count of `key`; zero for keys never seen.
    pub fn count(&self, key: &str) -> u64 {
        self.find(key.as_bytes())
            .map(|n| self.nodes[n].count)
            .unwrap_or(0)
    }

    pub(crate) fn context(&self, key: &[u8]) -> Option<ContextView<'_>> {
        let node = &self.nodes[self.find(key)?];
        Some(ContextView {
            count: node.count,
            table: self,
            children: &node.children,
        })
    }

    /// Every stored key with its count, in depth-first alphabet order.
    pub fn entries(&self) -> Vec<(String, u64)> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut key = Vec::new();
        self.walk(0, &mut key, &mut out);
        out
    }

    fn walk(&self, node: usize, key: &mut Vec<u8>, out: &mut Vec<(String, u64)>) {
        out.push((
            String::from_utf8(key.clone()).expect("alphabet keys are ascii"),
            self.nodes[node].count,
        ));
        for &(sym, child) in &self.nodes[node].children {
            key.push(Symbol::from_index(sym as usize).unwrap().to_char() as u8);
            self.walk(child as usize, key, out);
            key.pop();
        }
    }

    /// Check the prefix invariant `count(x) >= sum of count(x.c)` everywhere.
    pub fn is_prefix_consistent(&self) -> bool {
        self.nodes.iter().all(|n| {
            let below: u64 = n
                .children
                .iter()
                .map(|&(_, c)| self.nodes[c as usize].count)
                .sum();
            below <= n.count && n.children.len() <= ALPHABET_SIZE
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_counts() {
        let mut t = CountTable::new(Level::Word);
        t.add(b"cat ", 3);
        t.add(b"car ", 1);
        assert_eq!(t.total(), 4);
        assert_eq!(t.count("ca"), 4);
        assert_eq!(t.count("cat"), 3);
        assert_eq!(t.count("cat "), 3);
        assert_eq!(t.count("dog"), 0);
        assert!(t.is_prefix_consistent());
        let ctx = t.context(b"ca").unwrap();
        assert_eq!(ctx.distinct_followers(), 2);
        assert_eq!(ctx.follower_count(Symbol::from_char('t').unwrap().index()), 3);
    }

    #[test]
    fn entries_are_sorted_and_complete() {
        let mut t = CountTable::new(Level::Bigram);
        t.add(b"ba", 1);
        t.add(b"ab", 2);
        let keys: Vec<_> = t.entries().into_iter().map(|(k, _)| k).collect();
        assert_eq!(keys, vec!["", "a", "ab", "b", "ba"]);
    }
}
