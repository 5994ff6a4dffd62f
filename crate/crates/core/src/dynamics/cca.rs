//! Synchronous cyclic cellular automaton on a ring: a site advances to the
//! next color iff some neighbor already holds it.

use crate::lattice::Coloring;

/// One synchronous update from `old` into `new`.
pub fn cca_step(old: &[u8], new: &mut [u8], kappa: u8) {
    let n = old.len();
    debug_assert_eq!(n, new.len());
    if n == 0 {
        return;
    }
    let step = |left: u8, me: u8, right: u8| {
        let succ = if me + 1 == kappa { 0 } else { me + 1 };
        if left == succ || right == succ {
            succ
        } else {
            me
        }
    };
    new[0] = step(old[n - 1], old[0], old[1 % n]);
    for i in 1..n - 1 {
        new[i] = step(old[i - 1], old[i], old[i + 1]);
    }
    if n > 1 {
        new[n - 1] = step(old[n - 2], old[n - 1], old[0]);
    }
}

/// Rows `y0, y1, ..., y_steps`.
pub fn run_cca(y0: &Coloring, steps: usize) -> Vec<Coloring> {
    let k = y0.kappa();
    let mut rows = Vec::with_capacity(steps + 1);
    rows.push(y0.clone());
    let mut cur = y0.sites().to_vec();
    let mut next = vec![0u8; cur.len()];
    for _ in 0..steps {
        cca_step(&cur, &mut next, k);
        std::mem::swap(&mut cur, &mut next);
        rows.push(Coloring::new(k, cur.clone()).expect("update preserves the color range"));
    }
    rows
}

/// Streams CCA rows without keeping them; `visit(t, row)` sees `t = 0..=steps`.
pub fn run_cca_with<F: FnMut(usize, &[u8])>(y0: &Coloring, steps: usize, mut visit: F) {
    let k = y0.kappa();
    let mut cur = y0.sites().to_vec();
    let mut next = vec![0u8; cur.len()];
    visit(0, &cur);
    for t in 1..=steps {
        cca_step(&cur, &mut next, k);
        std::mem::swap(&mut cur, &mut next);
        visit(t, &cur);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::embed;
    use crate::rng::RngStream;

    fn col(k: u8, s: &[u8]) -> Coloring {
        Coloring::new(k, s.to_vec()).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(run_cca(&col(3, &[0, 1, 0]), 1)[1].sites(), &[1, 1, 1]);
        assert_eq!(run_cca(&col(3, &[0, 1, 2, 0, 0]), 1)[1].sites(), &[1, 2, 0, 0, 0]);
        let c = col(4, &[2; 6]);
        let rows = run_cca(&c, 10);
        assert_eq!(rows.len(), 11);
        assert!(rows.iter().all(|r| *r == c));
    }

    #[test]
    fn zero_steps() {
        let c = col(3, &[0, 1]);
        assert_eq!(run_cca(&c, 0), vec![c]);
    }

    #[test]
    fn streaming_matches_rows() {
        let y0 = Coloring::uniform(50, 3, &mut RngStream::new(4)).unwrap();
        let rows = run_cca(&y0, 20);
        run_cca_with(&y0, 20, |t, row| assert_eq!(rows[t].sites(), row));
    }

    #[test]
    fn directed_count_non_increasing_three_colors() {
        for seed in 0..20 {
            let y0 = Coloring::uniform(300, 3, &mut RngStream::new(seed)).unwrap();
            let counts: Vec<usize> = run_cca(&y0, 100).iter().map(|r| embed(r).unwrap().directed_count()).collect();
            assert!(counts.windows(2).all(|w| w[1] <= w[0]), "seed {seed}");
        }
    }
}
