//! Keyword relatedness graph and seed expansion.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashSet};

use super::BotError;

/// Graph shipped with the crate (`data/keywords.csv`).
pub const BUNDLED_GRAPH: &str = include_str!("../../data/keywords.csv");

/// Undirected graph of keywords with relatedness weights in `(0, 1]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeywordGraph {
    adjacency: BTreeMap<String, BTreeMap<String, f64>>,
}

impl KeywordGraph {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_GRAPH).expect("bundled keyword graph is valid")
    }

    /// Parses `keyword,keyword,weight` lines. `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, BotError> {
        let mut graph = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| BotError::KeywordGraph {
                line: i + 1,
                message: msg.to_string(),
            };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [a, b, w] = fields[..] else {
                return Err(bad("expected `keyword,keyword,weight`"));
            };
            if a.is_empty() || b.is_empty() {
                return Err(bad("empty keyword"));
            }
            if a == b {
                return Err(bad("self loop"));
            }
            let weight: f64 = w.parse().map_err(|_| bad("weight is not a number"))?;
            if !(weight > 0.0 && weight <= 1.0) {
                return Err(bad("weight must lie in (0, 1]"));
            }
            if graph.weight(a, b).is_some() {
                return Err(bad("duplicate edge"));
            }
            graph.add_edge(a, b, weight);
        }
        Ok(graph)
    }

    pub fn add_edge(&mut self, a: &str, b: &str, weight: f64) {
        self.adjacency
            .entry(a.to_string())
            .or_default()
            .insert(b.to_string(), weight);
        self.adjacency
            .entry(b.to_string())
            .or_default()
            .insert(a.to_string(), weight);
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<f64> {
        self.adjacency.get(a)?.get(b).copied()
    }

    pub fn contains(&self, keyword: &str) -> bool {
        self.adjacency.contains_key(keyword)
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn keywords(&self) -> impl Iterator<Item = &str> {
        self.adjacency.keys().map(String::as_str)
    }

    pub fn neighbors(&self, keyword: &str) -> impl Iterator<Item = (&str, f64)> {
        self.adjacency
            .get(keyword)
            .into_iter()
            .flat_map(|m| m.iter().map(|(k, w)| (k.as_str(), *w)))
    }

    /// Expands `seed` into `count` distinct related keywords, seed first.
    ///
    /// Keywords are discovered in order of their strongest relatedness path
    /// from the seed (product of edge weights along the path), ties broken
    /// alphabetically. Fewer than `count` are returned when the seed's
    /// component is smaller.
    pub fn expand(&self, seed: &str, count: usize) -> Result<Vec<String>, BotError> {
        if !self.contains(seed) {
            return Err(BotError::UnknownKeyword(seed.to_string()));
        }
        if count == 0 {
            return Err(BotError::InvalidConfig("expansion count must be >= 1".into()));
        }

        #[derive(PartialEq)]
        struct Candidate<'a>(f64, &'a str);
        impl Eq for Candidate<'_> {}
        impl Ord for Candidate<'_> {
            fn cmp(&self, other: &Self) -> Ordering {
                self.0.total_cmp(&other.0).then_with(|| other.1.cmp(self.1))
            }
        }
        impl PartialOrd for Candidate<'_> {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        let mut found = Vec::with_capacity(count);
        let mut settled: HashSet<&str> = HashSet::new();
        let mut frontier = BinaryHeap::from([Candidate(1.0, seed)]);
        while let Some(Candidate(strength, keyword)) = frontier.pop() {
            if !settled.insert(keyword) {
                continue;
            }
            found.push(keyword.to_string());
            if found.len() == count {
                break;
            }
            for (next, w) in self.neighbors(keyword) {
                if !settled.contains(next) {
                    frontier.push(Candidate(strength * w, next));
                }
            }
        }
        Ok(found)
    }
}

/// Convenience wrapper over [`KeywordGraph::expand`].
pub fn expand_keywords(graph: &KeywordGraph, seed: &str, count: usize) -> Result<Vec<String>, BotError> {
    graph.expand(seed, count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeSet, VecDeque};

    #[test]
    fn bundled_graph_is_large_and_symmetric() {
        let g = KeywordGraph::bundled();
        assert!(g.len() >= 200, "{}", g.len());
        for k in g.keywords() {
            for (n, w) in g.neighbors(k) {
                assert!(w > 0.0 && w <= 1.0);
                assert_eq!(g.weight(n, k), Some(w));
            }
        }
        for k in [
            "cat", "guns", "cooking recipes", "chess", "fishing", "bodybuilding", "opera",
            "composition", "toyota", "cooking", "chef", "kitchen",
        ] {
            assert!(g.contains(k), "{k}");
        }
    }

    #[test]
    fn opera_then_composition() {
        let g = KeywordGraph::bundled();
        assert_eq!(g.expand("opera", 2).unwrap(), ["opera", "composition"]);
    }

    #[test]
    fn toyota_drifts_into_the_kitchen() {
        let g = KeywordGraph::bundled();
        assert_eq!(g.expand("toyota", 4).unwrap(), ["toyota", "cooking", "chef", "kitchen"]);
    }

    #[test]
    fn count_one_is_the_seed() {
        let g = KeywordGraph::bundled();
        assert_eq!(g.expand("chess", 1).unwrap(), ["chess"]);
    }

    #[test]
    fn unknown_seed_errors() {
        let g = KeywordGraph::bundled();
        assert_eq!(
            g.expand("zzz", 3),
            Err(BotError::UnknownKeyword("zzz".into()))
        );
    }

    fn bfs_component(g: &KeywordGraph, seed: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::from([seed.to_string()]);
        let mut queue = VecDeque::from([seed.to_string()]);
        while let Some(k) = queue.pop_front() {
            for (n, _) in g.neighbors(&k) {
                if seen.insert(n.to_string()) {
                    queue.push_back(n.to_string());
                }
            }
        }
        seen
    }

    #[test]
    fn expansion_stays_in_the_seed_component() {
        let g = KeywordGraph::bundled();
        for seed in ["cat", "opera", "toyota", "meditation", "gardening"] {
            let component = bfs_component(&g, seed);
            let count = component.len().min(40);
            let got = g.expand(seed, count).unwrap();
            assert_eq!(got.len(), count);
            assert_eq!(got[0], seed);
            let distinct: BTreeSet<&String> = got.iter().collect();
            assert_eq!(distinct.len(), got.len());
            assert!(got.iter().all(|k| component.contains(k)));
        }
    }

    #[test]
    fn small_component_caps_the_result() {
        let g = KeywordGraph::parse("a,b,0.5\nb,c,0.5\nx,y,1.0\n").unwrap();
        assert_eq!(g.expand("a", 10).unwrap(), ["a", "b", "c"]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert!(matches!(
            KeywordGraph::parse("a,b,0.5\na,b,0.7\n"),
            Err(BotError::KeywordGraph { line: 2, .. })
        ));
        assert!(matches!(
            KeywordGraph::parse("# header\na,b,1.5\n"),
            Err(BotError::KeywordGraph { line: 2, .. })
        ));
        assert!(matches!(
            KeywordGraph::parse("a,b\n"),
            Err(BotError::KeywordGraph { line: 1, .. })
        ));
    }
}
