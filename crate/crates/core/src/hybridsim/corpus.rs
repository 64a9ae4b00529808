use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_ARTICLE_MB: f64 = 0.1;
pub const MAX_ARTICLE_MB: f64 = 3.0;
pub const MAX_COAUTHORS: u8 = 9;
pub const DEFAULT_AUTHORS: u32 = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub id: u32,
    pub size_mb: f64,
    /// Main author. Co-authors are kept only as a count.
    pub author_id: u32,
    pub coauthor_count: u8,
}

/// How to generate a corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub seed: u64,
    pub articles: usize,
    #[serde(default = "default_authors")]
    pub authors: u32,
}

fn default_authors() -> u32 {
    DEFAULT_AUTHORS
}

impl CorpusConfig {
    pub fn build(&self) -> Result<ArticleCorpus> {
        build_corpus_with_authors(self.seed, self.articles, self.authors)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArticleCorpus {
    articles: Vec<Article>,
    rng_seed: u64,
    authors: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRequest {
    pub author_id: u32,
    pub article_count: usize,
}

impl QueryRequest {
    pub fn new(author_id: u32, article_count: usize) -> Result<Self> {
        if article_count == 0 {
            return Err(Error::invalid("query request", "article_count must be at least 1"));
        }
        Ok(QueryRequest {
            author_id,
            article_count,
        })
    }
}

/// Corpus of `n_articles` with sizes uniform in `[0.1, 3.0]` MB and
/// `0..=9` co-authors, main authors assigned round-robin.
pub fn build_corpus(seed: u64, n_articles: usize) -> Result<ArticleCorpus> {
    build_corpus_with_authors(seed, n_articles, DEFAULT_AUTHORS)
}

pub fn build_corpus_with_authors(seed: u64, n_articles: usize, authors: u32) -> Result<ArticleCorpus> {
    if n_articles == 0 {
        return Err(Error::invalid("corpus", "n_articles must be at least 1"));
    }
    if authors == 0 {
        return Err(Error::invalid("corpus", "authors must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let articles = (0..n_articles)
        .map(|i| Article {
            id: i as u32,
            size_mb: rng.random_range(MIN_ARTICLE_MB..=MAX_ARTICLE_MB),
            author_id: i as u32 % authors,
            coauthor_count: rng.random_range(0..=MAX_COAUTHORS),
        })
        .collect();
    Ok(ArticleCorpus {
        articles,
        rng_seed: seed,
        authors,
    })
}

impl ArticleCorpus {
    /// Wraps hand-made articles after checking sizes, co-author counts and id uniqueness.
    pub fn from_articles(articles: Vec<Article>, rng_seed: u64) -> Result<Self> {
        if articles.is_empty() {
            return Err(Error::invalid("corpus", "no articles"));
        }
        let mut ids = std::collections::BTreeSet::new();
        for a in &articles {
            if !(MIN_ARTICLE_MB..=MAX_ARTICLE_MB).contains(&a.size_mb) {
                return Err(Error::invalid(
                    "corpus",
                    format!("article {} has size {} MB", a.id, a.size_mb),
                ));
            }
            if a.coauthor_count > MAX_COAUTHORS {
                return Err(Error::invalid(
                    "corpus",
                    format!("article {} has {} co-authors", a.id, a.coauthor_count),
                ));
            }
            if !ids.insert(a.id) {
                return Err(Error::invalid("corpus", format!("duplicate article id {}", a.id)));
            }
        }
        let authors = articles.iter().map(|a| a.author_id).max().unwrap_or(0) + 1;
        Ok(ArticleCorpus {
            articles,
            rng_seed,
            authors,
        })
    }

    pub fn articles(&self) -> &[Article] {
        &self.articles
    }

    pub fn seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn authors(&self) -> u32 {
        self.authors.min(self.articles.len() as u32)
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    /// Articles returned for `request`: the author's articles in id order,
    /// repeated from the start when more are requested than the author has.
    pub fn select(&self, request: &QueryRequest) -> Result<Vec<&Article>> {
        let own: Vec<&Article> = self
            .articles
            .iter()
            .filter(|a| a.author_id == request.author_id)
            .collect();
        if own.is_empty() {
            return Err(Error::UnknownAuthor(request.author_id));
        }
        Ok(own.iter().copied().cycle().take(request.article_count).collect())
    }
}
