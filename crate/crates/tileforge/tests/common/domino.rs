use tileforge::domino::*;

/// Young-tableau decision for k in 1..=k_max on widths 1..=max_width:
/// solvable at every height ≤ k, unsolvable at height k + 1. Returns the
/// number of rectangles decided.
pub fn young_decisions(k_max: usize, max_width: i64) -> usize {
    let mut decided = 0;
    for k in 1..=k_max {
        let d = young_tableau_set(k);
        for w in 1..=max_width {
            for h in 1..=k as i64 + 1 {
                let r = Rect::new((0, 0), (w - 1, h - 1)).unwrap();
                match solve_rectangle(&d, r, 10_000_000) {
                    SolveOutcome::Solution(t) => {
                        assert!(h <= k as i64, "k={k} {w}x{h} solvable");
                        assert!(verify_domino_function(&d, &t).unwrap().is_empty());
                        assert_eq!(t.rect, r);
                    }
                    SolveOutcome::Unsolvable => assert_eq!(h, k as i64 + 1, "k={k} {w}x{h} unsolvable"),
                    SolveOutcome::BudgetExhausted => panic!("k={k} {w}x{h} out of budget"),
                }
                decided += 1;
            }
        }
    }
    decided
}

/// Brute-force Wang tiling of a w×h board: cells in row-major order, each
/// tile matching its west neighbour's east color and its south neighbour's
/// north color. Tiles are [west, east, south, north].
pub fn wang_tileable(tiles: &[WangTile], w: usize, h: usize) -> bool {
    fn go(tiles: &[WangTile], w: usize, h: usize, board: &mut Vec<usize>) -> bool {
        let at = board.len();
        if at == w * h {
            return true;
        }
        let (x, y) = (at % w, at / w);
        for (k, t) in tiles.iter().enumerate() {
            if x > 0 && tiles[board[at - 1]][1] != t[0] {
                continue;
            }
            if y > 0 && tiles[board[at - w]][3] != t[2] {
                continue;
            }
            board.push(k);
            if go(tiles, w, h, board) {
                return true;
            }
            board.pop();
        }
        false
    }
    go(tiles, w, h, &mut Vec::new())
}

/// All tiles over colors {x, y} on each side.
pub fn two_color_tiles() -> Vec<WangTile> {
    super::odometer(4, 2)
        .map(|v| {
            let c = |b: i64| if b == 0 { "x".to_string() } else { "y".to_string() };
            [c(v[0]), c(v[1]), c(v[2]), c(v[3])]
        })
        .collect()
}

/// Compares domino solvability of every Wang set with 1..=max_tiles tiles
/// over two colors per side against the brute-force tiler on side×side.
/// Returns (sets, solvable).
pub fn wang_equivalence(max_tiles: usize, side: i64) -> (usize, usize) {
    let universe = two_color_tiles();
    let mut subsets: Vec<Vec<usize>> = vec![vec![]];
    let mut all = Vec::new();
    while let Some(s) = subsets.pop() {
        if !s.is_empty() {
            all.push(s.clone());
        }
        if s.len() < max_tiles {
            let start = s.last().map_or(0, |&l| l + 1);
            for k in start..universe.len() {
                let mut t = s.clone();
                t.push(k);
                subsets.push(t);
            }
        }
    }
    let rect = Rect::new((0, 0), (side - 1, side - 1)).unwrap();
    let mut solvable = 0;
    for s in &all {
        let tiles: Vec<WangTile> = s.iter().map(|&k| universe[k].clone()).collect();
        let w = WangTileSet::new(["x", "y"], ["x", "y"], tiles.clone()).unwrap();
        let d = wang_to_domino(&w).unwrap();
        let got = match solve_rectangle(&d, rect, 10_000_000) {
            SolveOutcome::Solution(t) => {
                assert!(verify_domino_function(&d, &t).unwrap().is_empty());
                true
            }
            SolveOutcome::Unsolvable => false,
            SolveOutcome::BudgetExhausted => panic!("{tiles:?} out of budget"),
        };
        let expected = wang_tileable(&tiles, side as usize, side as usize);
        assert_eq!(got, expected, "{tiles:?}");
        solvable += got as usize;
    }
    (all.len(), solvable)
}
