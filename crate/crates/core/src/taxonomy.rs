//! Category tree keyed by slash-delimited paths such as `Top/Society/Government`.
//!
//! The file format is one path per line. Blank lines and lines starting with
//! `#` are ignored. Every path except the single root must have its immediate
//! parent (the path minus its last segment) declared somewhere in the file.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategoryId(pub u32);

impl CategoryId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Category {
    pub id: CategoryId,
    pub path: String,
    pub parent: Option<CategoryId>,
    /// Sorted by path.
    pub children: Vec<CategoryId>,
}

impl Category {
    /// Last path segment.
    pub fn name(&self) -> &str {
        self.path.rsplit('/').next().unwrap_or(&self.path)
    }
}

#[derive(Clone, Debug)]
pub struct Taxonomy {
    categories: Vec<Category>,
    by_path: HashMap<String, CategoryId>,
    root: CategoryId,
}

fn parent_path(path: &str) -> Option<&str> {
    path.rfind('/').map(|i| &path[..i])
}

fn validate_path(path: &str, line: usize) -> Result<()> {
    if path.split('/').any(|seg| seg.trim().is_empty()) {
        return Err(Error::InvalidTaxonomy(format!(
            "line {line}: malformed path `{path}`"
        )));
    }
    Ok(())
}

impl Taxonomy {
    /// Builds a taxonomy from paths. Ids follow input order.
    pub fn from_paths<I, S>(paths: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut categories: Vec<Category> = Vec::new();
        let mut by_path = HashMap::new();
        for (i, p) in paths.into_iter().enumerate() {
            let path = p.as_ref().trim().to_string();
            validate_path(&path, i + 1)?;
            if by_path.contains_key(&path) {
                return Err(Error::DuplicateCategory(path));
            }
            let id = CategoryId(categories.len() as u32);
            by_path.insert(path.clone(), id);
            categories.push(Category {
                id,
                path,
                parent: None,
                children: Vec::new(),
            });
        }
        if categories.is_empty() {
            return Err(Error::InvalidTaxonomy("no categories".into()));
        }

        let mut roots = Vec::new();
        for i in 0..categories.len() {
            match parent_path(&categories[i].path) {
                None => roots.push(categories[i].id),
                Some(pp) => {
                    let parent = *by_path.get(pp).ok_or_else(|| Error::MissingParent {
                        path: categories[i].path.clone(),
                        parent: pp.to_string(),
                    })?;
                    categories[i].parent = Some(parent);
                    let child = categories[i].id;
                    categories[parent.index()].children.push(child);
                }
            }
        }
        let root = match roots.as_slice() {
            [root] => *root,
            _ => {
                let names: Vec<_> = roots
                    .iter()
                    .map(|r| categories[r.index()].path.as_str())
                    .collect();
                return Err(Error::InvalidTaxonomy(format!(
                    "expected exactly one root, found {}: [{}]",
                    roots.len(),
                    names.join(", ")
                )));
            }
        };

        let mut taxonomy = Taxonomy {
            categories,
            by_path,
            root,
        };
        for i in 0..taxonomy.categories.len() {
            let mut children = std::mem::take(&mut taxonomy.categories[i].children);
            children.sort_by(|a, b| taxonomy.path(*a).cmp(taxonomy.path(*b)));
            taxonomy.categories[i].children = children;
        }
        taxonomy.check_acyclic()?;
        Ok(taxonomy)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_paths(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Serializes back to the line format, in id order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.categories {
            out.push_str(&c.path);
            out.push('\n');
        }
        out
    }

    // Paths make cycles impossible by construction; this only guards the
    // parent links we wired up above.
    fn check_acyclic(&self) -> Result<()> {
        let reached = self.subtree(self.root)?.len();
        if reached != self.categories.len() {
            return Err(Error::InvalidTaxonomy(format!(
                "{} categories unreachable from the root",
                self.categories.len() - reached
            )));
        }
        Ok(())
    }

    pub fn root(&self) -> CategoryId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn get(&self, id: CategoryId) -> Option<&Category> {
        self.categories.get(id.index())
    }

    pub fn category(&self, id: CategoryId) -> &Category {
        &self.categories[id.index()]
    }

    pub fn path(&self, id: CategoryId) -> &str {
        &self.categories[id.index()].path
    }

    pub fn id_of(&self, path: &str) -> Option<CategoryId> {
        self.by_path.get(path).copied()
    }

    pub fn depth(&self, id: CategoryId) -> usize {
        self.path(id).matches('/').count()
    }

    /// `root` followed by all of its descendants in depth-first pre-order,
    /// children visited in path order.
    pub fn subtree(&self, root: CategoryId) -> Result<Vec<CategoryId>> {
        if self.get(root).is_none() {
            return Err(Error::NotFound(format!("category id {}", root.0)));
        }
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if out.len() > self.categories.len() {
                return Err(Error::InvalidTaxonomy("cycle detected".into()));
            }
            out.push(id);
            stack.extend(self.category(id).children.iter().rev().copied());
        }
        Ok(out)
    }

    /// Children before parents.
    pub fn post_order(&self) -> Vec<CategoryId> {
        let mut order = self.subtree(self.root).expect("root exists");
        order.reverse();
        order
    }

    /// Drops every category whose subtree holds fewer than `min_docs`
    /// labeled documents. The root is always kept. `doc_counts` is indexed
    /// by category id and counts documents labeled directly with it.
    ///
    /// Returns the pruned taxonomy and an old-id to new-id map.
    pub fn prune(&self, doc_counts: &[usize], min_docs: usize) -> (Taxonomy, Vec<Option<CategoryId>>) {
        let mut subtree_counts = vec![0usize; self.len()];
        for id in self.post_order() {
            let own = doc_counts.get(id.index()).copied().unwrap_or(0);
            let below: usize = self
                .category(id)
                .children
                .iter()
                .map(|c| subtree_counts[c.index()])
                .sum();
            subtree_counts[id.index()] = own + below;
        }
        let mut keep = vec![false; self.len()];
        for id in self.subtree(self.root).expect("root exists") {
            let parent_kept = self.category(id).parent.is_none_or(|p| keep[p.index()]);
            keep[id.index()] =
                id == self.root || (parent_kept && subtree_counts[id.index()] >= min_docs);
        }
        let kept: Vec<&str> = self
            .categories
            .iter()
            .filter(|c| keep[c.id.index()])
            .map(|c| c.path.as_str())
            .collect();
        let pruned = Taxonomy::from_paths(kept).expect("pruning preserves validity");
        let mapping = self
            .categories
            .iter()
            .map(|c| {
                if keep[c.id.index()] {
                    pruned.id_of(&c.path)
                } else {
                    None
                }
            })
            .collect();
        (pruned, mapping)
    }
}
