//! 6x6 flashboards, probability-ranked virtual layouts and scan scheduling.
//!
//! The physical board never moves. A virtual layout only decides which six
//! cells light up together: its rows and columns are mapped back onto the
//! physical board as twelve highlight groups.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lm::{CharDist, Symbol, ALPHABET_SIZE};

pub const GRID: usize = 6;
pub const CELL_COUNT: usize = GRID * GRID;
pub const MAX_SUGGESTIONS: usize = 6;
pub const GROUP_COUNT: usize = 2 * GRID;

/// What a cell shows. Every content has a stable index in `0..36`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellContent {
    Letter(Symbol),
    Space,
    Backspace,
    SuggestionSlot(u8),
    Blank(u8),
}

impl CellContent {
    pub fn from_symbol(s: Symbol) -> Self {
        if s.is_space() {
            CellContent::Space
        } else {
            CellContent::Letter(s)
        }
    }

    /// Letters `0..26`, Space 26, Backspace 27, slots `28..34`, blanks 34 and 35.
    pub fn index(self) -> usize {
        match self {
            CellContent::Letter(s) => s.index(),
            CellContent::Space => Symbol::SPACE.index(),
            CellContent::Backspace => 27,
            CellContent::SuggestionSlot(i) => 28 + i as usize,
            CellContent::Blank(i) => 34 + i as usize,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Some(match index {
            0..=26 => CellContent::from_symbol(Symbol::from_index(index)?),
            27 => CellContent::Backspace,
            28..=33 => CellContent::SuggestionSlot((index - 28) as u8),
            34 | 35 => CellContent::Blank((index - 34) as u8),
            _ => return None,
        })
    }

    pub fn symbol(self) -> Option<Symbol> {
        match self {
            CellContent::Letter(s) => Some(s),
            CellContent::Space => Some(Symbol::SPACE),
            _ => None,
        }
    }

    pub fn all() -> impl Iterator<Item = CellContent> {
        (0..CELL_COUNT).map(|i| CellContent::from_index(i).unwrap())
    }
}

/// Cells after the 27 ranked symbols, lowest rank last.
const TAIL: [CellContent; 9] = [
    CellContent::Blank(0),
    CellContent::Blank(1),
    CellContent::SuggestionSlot(0),
    CellContent::SuggestionSlot(1),
    CellContent::SuggestionSlot(2),
    CellContent::SuggestionSlot(3),
    CellContent::SuggestionSlot(4),
    CellContent::SuggestionSlot(5),
    CellContent::Backspace,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub row: u8,
    pub col: u8,
}

impl Position {
    pub fn new(row: usize, col: usize) -> Self {
        debug_assert!(row < GRID && col < GRID);
        Position {
            row: row as u8,
            col: col as u8,
        }
    }

    pub fn from_index(i: usize) -> Self {
        Position::new(i / GRID, i % GRID)
    }

    pub fn index(self) -> usize {
        self.row as usize * GRID + self.col as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    pub content: CellContent,
    pub position: Position,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LayoutKind {
    Alphabetical,
    Sequential,
    Diagonal,
}

/// A full 6x6 board plus the words shown in its suggestion slots.
#[derive(Clone, Debug, PartialEq)]
pub struct Flashboard {
    kind: LayoutKind,
    /// Content at each position index.
    cells: [CellContent; CELL_COUNT],
    /// Position index of each content index.
    where_is: [u8; CELL_COUNT],
    words: Vec<String>,
}

impl Flashboard {
    fn from_cells(kind: LayoutKind, cells: [CellContent; CELL_COUNT]) -> Self {
        let mut where_is = [0u8; CELL_COUNT];
        for (pos, c) in cells.iter().enumerate() {
            where_is[c.index()] = pos as u8;
        }
        Flashboard {
            kind,
            cells,
            where_is,
            words: Vec::new(),
        }
    }

    fn from_ranking(kind: LayoutKind, ranking: &[CellContent; CELL_COUNT], order: &[Position]) -> Self {
        let mut cells = [CellContent::Blank(0); CELL_COUNT];
        for (content, pos) in ranking.iter().zip(order) {
            cells[pos.index()] = *content;
        }
        Flashboard::from_cells(kind, cells)
    }

    /// The conventional board: `a`..`z`, SP, two blanks, six suggestion
    /// slots and Backspace, row-major.
    pub fn alphabetical() -> Self {
        let order: Vec<Position> = (0..CELL_COUNT).map(Position::from_index).collect();
        Flashboard::from_ranking(LayoutKind::Alphabetical, &rank_contents(&[1.0; ALPHABET_SIZE]), &order)
    }

    pub fn kind(&self) -> LayoutKind {
        self.kind
    }

    pub fn content_at(&self, pos: Position) -> CellContent {
        self.cells[pos.index()]
    }

    pub fn position_of(&self, content: CellContent) -> Position {
        Position::from_index(self.where_is[content.index()] as usize)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells.iter().enumerate().map(|(i, &content)| Cell {
            content,
            position: Position::from_index(i),
        })
    }

    /// Words placed in slots `0..k`.
    pub fn suggestions(&self) -> &[String] {
        &self.words
    }

    pub fn suggestion(&self, slot: u8) -> Option<&str> {
        self.words.get(slot as usize).map(String::as_str)
    }

    /// Whether the cell can be selected at all. Blanks and empty slots are inert.
    pub fn is_active(&self, content: CellContent) -> bool {
        match content {
            CellContent::Blank(_) => false,
            CellContent::SuggestionSlot(i) => (i as usize) < self.words.len(),
            _ => true,
        }
    }

    pub fn label(&self, content: CellContent) -> String {
        match content {
            CellContent::Letter(s) => s.to_char().to_string(),
            CellContent::Space => "SP".into(),
            CellContent::Backspace => "BS".into(),
            CellContent::SuggestionSlot(i) => match self.suggestion(i) {
                Some(w) => w.to_string(),
                None => format!("S{i}"),
            },
            CellContent::Blank(_) => "--".into(),
        }
    }

    /// Six lines of six space-separated labels.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for row in 0..GRID {
            let labels: Vec<String> = (0..GRID)
                .map(|col| self.label(self.content_at(Position::new(row, col))))
                .collect();
            let _ = writeln!(out, "{}", labels.join(" "));
        }
        out
    }

    /// Rows (ids 0..6) and columns (ids 6..12) of this board.
    pub fn groups(&self) -> [HighlightGroup; GROUP_COUNT] {
        std::array::from_fn(|id| {
            let kind = if id < GRID { GroupKind::Row } else { GroupKind::Column };
            let members: [Position; GRID] = std::array::from_fn(|k| match kind {
                GroupKind::Row => Position::new(id, k),
                GroupKind::Column => Position::new(k, id - GRID),
            });
            HighlightGroup::new(id as u8, kind, members, self)
        })
    }
}

/// Sort the 27 symbols by descending probability (ties alphabetical) and
/// append the fixed tail.
fn rank_contents(dist: &CharDist) -> [CellContent; CELL_COUNT] {
    let mut symbols: Vec<Symbol> = Symbol::all().collect();
    symbols.sort_by(|a, b| dist[b.index()].total_cmp(&dist[a.index()]).then(a.cmp(b)));
    let mut out = [CellContent::Blank(0); CELL_COUNT];
    for (slot, content) in out
        .iter_mut()
        .zip(symbols.into_iter().map(CellContent::from_symbol).chain(TAIL))
    {
        *slot = content;
    }
    out
}

fn check_dist(dist: &CharDist) -> Result<()> {
    for s in Symbol::all() {
        let p = dist[s.index()];
        if !p.is_finite() || p < 0.0 {
            return Err(Error::MissingSymbol(s.to_char()));
        }
    }
    Ok(())
}

/// Assemble a distribution from `(symbol, probability)` pairs; every letter
/// and SPACE must be present.
pub fn dist_from_pairs(pairs: &[(char, f64)]) -> Result<CharDist> {
    let mut dist = [f64::NAN; ALPHABET_SIZE];
    for &(c, p) in pairs {
        let s = Symbol::from_char(c).ok_or(Error::MissingSymbol(c))?;
        dist[s.index()] = p;
    }
    check_dist(&dist)?;
    Ok(dist)
}

/// Row-major fill in descending probability.
pub fn layout_sequential(dist: &CharDist) -> Result<Flashboard> {
    check_dist(dist)?;
    let order: Vec<Position> = (0..CELL_COUNT).map(Position::from_index).collect();
    Ok(Flashboard::from_ranking(LayoutKind::Sequential, &rank_contents(dist), &order))
}

/// Fill the wrapped diagonals `D_k = {(i, (i + k) mod 6)}` in rank order,
/// six symbols per diagonal, ascending row within a diagonal.
pub fn layout_diagonal(dist: &CharDist) -> Result<Flashboard> {
    check_dist(dist)?;
    let order: Vec<Position> = (0..GRID)
        .flat_map(|k| (0..GRID).map(move |i| Position::new(i, (i + k) % GRID)))
        .collect();
    Ok(Flashboard::from_ranking(LayoutKind::Diagonal, &rank_contents(dist), &order))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupKind {
    Row,
    Column,
}

/// Six cells flashed together.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HighlightGroup {
    pub id: u8,
    pub kind: GroupKind,
    /// Physical positions.
    pub members: [Position; GRID],
    /// Bit `i` set when content index `i` is in the group.
    pub mask: u64,
}

impl HighlightGroup {
    fn new(id: u8, kind: GroupKind, members: [Position; GRID], board: &Flashboard) -> Self {
        let mask = members
            .iter()
            .fold(0u64, |m, &p| m | 1 << board.content_at(p).index());
        HighlightGroup {
            id,
            kind,
            members,
            mask,
        }
    }

    pub fn contains(&self, content: CellContent) -> bool {
        self.mask & (1 << content.index()) != 0
    }

    /// Posterior mass of the group's members; `posterior` is indexed by content.
    pub fn mass(&self, posterior: &[f64; CELL_COUNT]) -> f64 {
        (0..CELL_COUNT)
            .filter(|&i| self.mask & (1 << i) != 0)
            .map(|i| posterior[i])
            .sum()
    }
}

/// A virtual layout laid over a physical board.
#[derive(Clone, Debug)]
pub struct VirtualMapping {
    /// Physical position of each virtual position index.
    pub to_physical: [Position; CELL_COUNT],
    /// Virtual rows and columns expressed as physical cells.
    pub groups: [HighlightGroup; GROUP_COUNT],
}

/// Map `virtual_board` onto `physical` by content and derive the twelve
/// physical highlight sets.
pub fn map_virtual(virtual_board: &Flashboard, physical: &Flashboard) -> Result<VirtualMapping> {
    let mut seen = [false; CELL_COUNT];
    for c in physical.cells.iter() {
        seen[c.index()] = true;
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::ContentMismatch);
    }
    let to_physical: [Position; CELL_COUNT] =
        std::array::from_fn(|v| physical.position_of(virtual_board.cells[v]));
    let virtual_groups = virtual_board.groups();
    let groups = virtual_groups.map(|g| {
        let members = g.members.map(|p| to_physical[p.index()]);
        HighlightGroup::new(g.id, g.kind, members, physical)
    });
    Ok(VirtualMapping {
        to_physical,
        groups,
    })
}

/// Put up to six words into the suggestion slots in order.
pub fn place_suggestions(board: &Flashboard, suggestions: &[String]) -> Result<Flashboard> {
    if suggestions.len() > MAX_SUGGESTIONS {
        return Err(Error::TooManySuggestions {
            max: MAX_SUGGESTIONS,
            got: suggestions.len(),
        });
    }
    for (i, w) in suggestions.iter().enumerate() {
        if suggestions[..i].contains(w) {
            return Err(Error::DuplicateSuggestion(w.clone()));
        }
    }
    let mut out = board.clone();
    out.words = suggestions.to_vec();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScanPolicy {
    Random,
    Deterministic,
    Weighted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScanSchedule {
    pub policy: ScanPolicy,
    pub rng_seed: u64,
}

impl ScanPolicy {
    /// Order of the twelve group ids for one scan round.
    ///
    /// `posterior` is indexed by content and only consulted by the weighted
    /// policy; `rng` only by the random one.
    pub fn schedule_round<R: Rng + ?Sized>(
        self,
        groups: &[HighlightGroup; GROUP_COUNT],
        posterior: &[f64; CELL_COUNT],
        rng: &mut R,
    ) -> [u8; GROUP_COUNT] {
        let mut ids: [u8; GROUP_COUNT] = std::array::from_fn(|i| groups[i].id);
        match self {
            ScanPolicy::Deterministic => ids.sort_unstable(),
            ScanPolicy::Random => {
                ids.sort_unstable();
                ids.shuffle(rng);
            }
            ScanPolicy::Weighted => {
                let mut scored: Vec<(f64, u8)> = groups.iter().map(|g| (g.mass(posterior), g.id)).collect();
                scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
                for (slot, (_, id)) in ids.iter_mut().zip(scored) {
                    *slot = id;
                }
            }
        }
        ids
    }
}
