use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::{affine_table, inner_product_table, sample_balanced, TruthTable};
use crate::error::{Error, Result};
use crate::qcore::parse_digits;

/// A named way of producing an oracle table from a textual argument,
/// addressed as `<name>:<argument>`.
pub trait OracleSource: Send + Sync {
    fn name(&self) -> &'static str;

    /// One-line usage hint, e.g. `ip:<digits>`.
    fn usage(&self) -> &'static str;

    fn build(
        &self,
        argument: &str,
        local_dim: usize,
        arity: usize,
        base_dir: Option<&Path>,
    ) -> Result<TruthTable>;
}

struct Constant;
struct InnerProduct;
struct Affine;
struct RandomBalanced;
struct File;

fn bad_argument(source: &str, argument: &str, hint: &str) -> Error {
    Error::parse(
        1,
        source.len() + 2,
        format!("invalid argument '{argument}' for oracle '{source}': expected {hint}"),
    )
}

impl OracleSource for Constant {
    fn name(&self) -> &'static str {
        "constant"
    }

    fn usage(&self) -> &'static str {
        "constant:<value>"
    }

    fn build(&self, arg: &str, q: usize, n: usize, _: Option<&Path>) -> Result<TruthTable> {
        let v: usize = arg
            .parse()
            .map_err(|_| bad_argument(self.name(), arg, "a digit"))?;
        TruthTable::constant(q, n, v)
    }
}

impl OracleSource for InnerProduct {
    fn name(&self) -> &'static str {
        "ip"
    }

    fn usage(&self) -> &'static str {
        "ip:<digits of y>"
    }

    fn build(&self, arg: &str, q: usize, n: usize, _: Option<&Path>) -> Result<TruthTable> {
        let y = parse_digits(arg, q)?;
        inner_product_table(&y, q, n)
    }
}

impl OracleSource for Affine {
    fn name(&self) -> &'static str {
        "affine"
    }

    fn usage(&self) -> &'static str {
        "affine:<digits of y>:<b>"
    }

    fn build(&self, arg: &str, q: usize, n: usize, _: Option<&Path>) -> Result<TruthTable> {
        let (y, b) = arg
            .split_once(':')
            .ok_or_else(|| bad_argument(self.name(), arg, "<digits>:<b>"))?;
        let y = parse_digits(y, q)?;
        let b: usize = b
            .parse()
            .map_err(|_| bad_argument(self.name(), arg, "<digits>:<b>"))?;
        affine_table(&y, b, q, n)
    }
}

impl OracleSource for RandomBalanced {
    fn name(&self) -> &'static str {
        "random-balanced"
    }

    fn usage(&self) -> &'static str {
        "random-balanced:<seed>"
    }

    fn build(&self, arg: &str, q: usize, n: usize, _: Option<&Path>) -> Result<TruthTable> {
        if q != 2 {
            return Err(Error::QubitOnly(q));
        }
        let seed: u64 = arg
            .parse()
            .map_err(|_| bad_argument(self.name(), arg, "an unsigned seed"))?;
        sample_balanced(n, seed)
    }
}

impl OracleSource for File {
    fn name(&self) -> &'static str {
        "file"
    }

    fn usage(&self) -> &'static str {
        "file:<path>"
    }

    fn build(&self, arg: &str, q: usize, n: usize, base: Option<&Path>) -> Result<TruthTable> {
        let path = match base {
            Some(dir) if Path::new(arg).is_relative() => dir.join(arg),
            _ => PathBuf::from(arg),
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::Domain(format!("cannot read truth table {}: {e}", path.display())))?;
        TruthTable::parse(&text, q, n)
    }
}

/// Name-keyed set of [`OracleSource`]s.
pub struct OracleRegistry {
    sources: BTreeMap<&'static str, Box<dyn OracleSource>>,
}

impl Default for OracleRegistry {
    /// `constant`, `ip`, `affine`, `random-balanced`, `file`.
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Constant));
        r.register(Box::new(InnerProduct));
        r.register(Box::new(Affine));
        r.register(Box::new(RandomBalanced));
        r.register(Box::new(File));
        r
    }
}

impl OracleRegistry {
    pub fn empty() -> Self {
        Self {
            sources: BTreeMap::new(),
        }
    }

    /// Adds or replaces a source under its own name.
    pub fn register(&mut self, source: Box<dyn OracleSource>) {
        self.sources.insert(source.name(), source);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.sources.keys().copied()
    }

    pub fn usages(&self) -> Vec<&'static str> {
        self.sources.values().map(|s| s.usage()).collect()
    }

    /// Resolves `<name>:<argument>`.
    pub fn resolve(
        &self,
        spec: &str,
        local_dim: usize,
        arity: usize,
        base_dir: Option<&Path>,
    ) -> Result<TruthTable> {
        let (name, arg) = spec.split_once(':').ok_or_else(|| {
            Error::parse(
                1,
                1,
                format!(
                    "oracle '{spec}' is not of the form <name>:<argument> (known: {})",
                    self.usages().join(", ")
                ),
            )
        })?;
        let source = self.sources.get(name).ok_or_else(|| {
            Error::parse(
                1,
                1,
                format!(
                    "unknown oracle source '{name}' (known: {})",
                    self.names().collect::<Vec<_>>().join(", ")
                ),
            )
        })?;
        source.build(arg, local_dim, arity, base_dir)
    }

    /// Like [`resolve`](Self::resolve), but a reference whose prefix is not
    /// a registered name is read as a truth-table path.
    pub fn resolve_reference(
        &self,
        reference: &str,
        local_dim: usize,
        arity: usize,
        base_dir: Option<&Path>,
    ) -> Result<TruthTable> {
        match reference.split_once(':') {
            Some((name, _)) if self.sources.contains_key(name) => {
                self.resolve(reference, local_dim, arity, base_dir)
            }
            _ => File.build(reference, local_dim, arity, base_dir),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{classify, PromiseClass};

    #[test]
    fn builtin_names_resolve() {
        let r = OracleRegistry::default();
        assert_eq!(
            r.names().collect::<Vec<_>>(),
            vec!["affine", "constant", "file", "ip", "random-balanced"]
        );
        assert_eq!(r.resolve("constant:1", 2, 2, None).unwrap().values(), &[1, 1, 1, 1]);
        assert_eq!(r.resolve("ip:11", 2, 2, None).unwrap().values(), &[0, 1, 1, 0]);
        assert_eq!(r.resolve("affine:1:1", 2, 1, None).unwrap().values(), &[1, 0]);
        let rb = r.resolve("random-balanced:9", 2, 4, None).unwrap();
        assert_eq!(classify(&rb).unwrap(), PromiseClass::Balanced);
        assert_eq!(rb, sample_balanced(4, 9).unwrap());
    }

    #[test]
    fn bad_references_are_parse_errors() {
        let r = OracleRegistry::default();
        for bad in ["nope:1", "ip", "constant:x", "affine:11", "random-balanced:-1"] {
            let e = r.resolve(bad, 2, 2, None).unwrap_err();
            assert_eq!(e.class(), crate::error::ErrorClass::Parse, "{bad}: {e}");
        }
        assert!(r.resolve("ip:111", 2, 2, None).is_err());
    }

    #[test]
    fn file_source_reads_relative_to_base() {
        let dir = std::env::temp_dir().join(format!("bulkq-oracle-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("t.txt"), "# parity\n0110\n").unwrap();
        let r = OracleRegistry::default();
        let t = r.resolve("file:t.txt", 2, 2, Some(&dir)).unwrap();
        assert_eq!(t.values(), &[0, 1, 1, 0]);
        let t = r.resolve_reference("t.txt", 2, 2, Some(&dir)).unwrap();
        assert_eq!(t.values(), &[0, 1, 1, 0]);
        std::fs::remove_dir_all(&dir).ok();
    }

    struct Majority;
    impl OracleSource for Majority {
        fn name(&self) -> &'static str {
            "majority"
        }
        fn usage(&self) -> &'static str {
            "majority:"
        }
        fn build(&self, _: &str, q: usize, n: usize, _: Option<&Path>) -> Result<TruthTable> {
            TruthTable::from_fn(q, n, |x| usize::from(2 * (x.count_ones() as usize) > n))
        }
    }

    #[test]
    fn custom_sources_can_be_registered() {
        let mut r = OracleRegistry::default();
        r.register(Box::new(Majority));
        assert_eq!(r.resolve("majority:", 2, 3, None).unwrap().to_text(), "00010111");
    }
}
