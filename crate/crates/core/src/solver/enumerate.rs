//! Level matrices that grow weakly along both type axes.

/// Row-wise nondecreasing sequences of length `cols` over `levels` values.
fn sorted_rows(levels: usize, cols: usize) -> Vec<Vec<u16>> {
    fn go(levels: usize, cols: usize, prefix: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if prefix.len() == cols {
            out.push(prefix.clone());
            return;
        }
        let start = prefix.last().copied().unwrap_or(0);
        for l in start..levels as u16 {
            prefix.push(l);
            go(levels, cols, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(levels, cols, &mut Vec::with_capacity(cols), &mut out);
    out
}

fn dominates(upper: &[u16], lower: &[u16]) -> bool {
    upper.iter().zip(lower).all(|(u, l)| u >= l)
}

/// Rows beyond which the exact count is not attempted.
const MAX_ROW_STATES: u128 = 5_000;

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Number of monotone `rows x cols` level matrices. When there are too many
/// row states to count exactly, returns the row-state count, a lower bound.
pub(crate) fn count(levels: usize, rows: usize, cols: usize) -> u128 {
    let states = binomial((levels + cols - 1) as u128, cols as u128);
    if states > MAX_ROW_STATES {
        return states;
    }
    let row_set = sorted_rows(levels, cols);
    let mut ways = vec![1u128; row_set.len()];
    for _ in 1..rows {
        ways = row_set
            .iter()
            .map(|upper| {
                row_set
                    .iter()
                    .zip(&ways)
                    .filter(|(lower, _)| dominates(upper, lower))
                    .fold(0u128, |acc, (_, w)| acc.saturating_add(*w))
            })
            .collect();
    }
    ways.iter().fold(0u128, |acc, w| acc.saturating_add(*w))
}

/// All monotone level matrices in lexicographic row-major order, flattened.
pub(crate) fn enumerate(levels: usize, rows: usize, cols: usize) -> Vec<Vec<u16>> {
    let row_set = sorted_rows(levels, cols);
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::with_capacity(rows);
    fn go(row_set: &[Vec<u16>], rows: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<u16>>) {
        if stack.len() == rows {
            out.push(stack.iter().flat_map(|&i| row_set[i].iter().copied()).collect());
            return;
        }
        for i in 0..row_set.len() {
            if stack.last().is_none_or(|&p| dominates(&row_set[i], &row_set[p])) {
                stack.push(i);
                go(row_set, rows, stack, out);
                stack.pop();
            }
        }
    }
    go(&row_set, rows, &mut stack, &mut out);
    out
}
