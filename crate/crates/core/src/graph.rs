//! Small internal graph utilities over adjacency lists indexed 0..n.

/// Iterative Tarjan strongly-connected components; components are returned in
/// reverse topological order, nodes within a component ascending.
pub(crate) fn tarjan_scc(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = succ.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut counter = 0usize;
    // Call frames: (node, next-successor position).
    let mut frames: Vec<(usize, usize)> = Vec::new();

    for start in 0..n {
        if index[start] != usize::MAX {
            continue;
        }
        frames.push((start, 0));
        index[start] = counter;
        low[start] = counter;
        counter += 1;
        stack.push(start);
        on_stack[start] = true;
        while let Some(&mut (v, ref mut i)) = frames.last_mut() {
            if *i < succ[v].len() {
                let w = succ[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&(u, _)) = frames.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

/// Nodes reachable from `roots` (forward).
pub(crate) fn reachable_from(succ: &[Vec<usize>], roots: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    let mut queue: Vec<usize> = Vec::new();
    for r in roots {
        if !seen[r] {
            seen[r] = true;
            queue.push(r);
        }
    }
    while let Some(v) = queue.pop() {
        for &w in &succ[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push(w);
            }
        }
    }
    seen
}

/// Nodes from which some node of `targets` is reachable (backward closure).
pub(crate) fn can_reach(succ: &[Vec<usize>], targets: &[bool]) -> Vec<bool> {
    let n = succ.len();
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, ws) in succ.iter().enumerate() {
        for &w in ws {
            pred[w].push(v);
        }
    }
    let mut seen: Vec<bool> = targets.to_vec();
    let mut queue: Vec<usize> = (0..n).filter(|&v| seen[v]).collect();
    while let Some(v) = queue.pop() {
        for &u in &pred[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push(u);
            }
        }
    }
    seen
}

/// Shortest path (BFS, ascending tie-break) from `from` to any target node,
/// restricted to `allowed` nodes; returns the node sequence including both
/// endpoints, or None.
pub(crate) fn bfs_path(
    succ: &[Vec<usize>],
    from: usize,
    target: &dyn Fn(usize) -> bool,
    allowed: &dyn Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    if !allowed(from) {
        return None;
    }
    let n = succ.len();
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    seen[from] = true;
    let mut queue = std::collections::VecDeque::from([from]);
    let mut found = if target(from) { Some(from) } else { None };
    while found.is_none() {
        let Some(v) = queue.pop_front() else { break };
        for &w in &succ[v] {
            if !seen[w] && allowed(w) {
                seen[w] = true;
                prev[w] = v;
                if target(w) {
                    found = Some(w);
                    break;
                }
                queue.push_back(w);
            }
        }
    }
    let mut node = found?;
    let mut path = vec![node];
    while node != from {
        node = prev[node];
        path.push(node);
    }
    path.reverse();
    Some(path)
}
