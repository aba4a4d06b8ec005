use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, RwLock};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimilarityError {
    #[error("embedding backend unreachable: {0}")]
    Unreachable(String),
    #[error("embedding backend returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed embedding response: {0}")]
    InvalidResponse(String),
}

/// Pairwise similarity between generated and reference questions.
pub trait Similarity: Send + Sync {
    fn id(&self) -> &str;

    /// `m[i][j]` = similarity of `gen[i]` and `gt[j]`, in `[-1, 1]`.
    fn matrix(&self, gen: &[String], gt: &[String]) -> Result<Vec<Vec<f64>>, SimilarityError>;
}

/// 1 for identical trimmed text, else 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactMatch;

impl Similarity for ExactMatch {
    fn id(&self) -> &str {
        "exact-match"
    }

    fn matrix(&self, gen: &[String], gt: &[String]) -> Result<Vec<Vec<f64>>, SimilarityError> {
        Ok(gen
            .iter()
            .map(|g| {
                gt.iter()
                    .map(|r| if g.trim() == r.trim() { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect())
    }
}

/// Jaccard index of the alphanumeric token sets; case-sensitive.
#[derive(Debug, Clone, Copy, Default)]
pub struct TokenJaccard;

fn tokens(s: &str) -> BTreeSet<&str> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .collect()
}

pub fn jaccard(a: &str, b: &str) -> f64 {
    let (a, b) = (tokens(a), tokens(b));
    let union = a.union(&b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

impl Similarity for TokenJaccard {
    fn id(&self) -> &str {
        "token-jaccard"
    }

    fn matrix(&self, gen: &[String], gt: &[String]) -> Result<Vec<Vec<f64>>, SimilarityError> {
        Ok(gen
            .iter()
            .map(|g| gt.iter().map(|r| jaccard(g.trim(), r.trim())).collect())
            .collect())
    }
}

/// Produces one vector per text. Vectors need not be normalized.
pub trait Embedder: Send + Sync {
    fn id(&self) -> &str;
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, SimilarityError>;
}

/// Backend id and trimmed text.
type CacheKey = (String, String);

/// Cosine similarity over an [`Embedder`], with vectors cached by
/// `(backend id, text)` and normalized to unit length on insertion.
pub struct EmbeddingSimilarity<E> {
    embedder: E,
    cache: RwLock<HashMap<CacheKey, Arc<Vec<f64>>>>,
}

impl<E: Embedder> EmbeddingSimilarity<E> {
    pub fn new(embedder: E) -> Self {
        EmbeddingSimilarity {
            embedder,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn cached(&self) -> usize {
        self.cache.read().unwrap().len()
    }

    fn vectors(&self, texts: &[String]) -> Result<Vec<Arc<Vec<f64>>>, SimilarityError> {
        let id = self.embedder.id().to_owned();
        let key = |t: &String| (id.clone(), t.trim().to_owned());
        let missing: Vec<String> = {
            let cache = self.cache.read().unwrap();
            let mut seen = BTreeSet::new();
            texts
                .iter()
                .map(|t| t.trim().to_owned())
                .filter(|t| !cache.contains_key(&(id.clone(), t.clone())) && seen.insert(t.clone()))
                .collect()
        };
        if !missing.is_empty() {
            let vectors = self.embedder.embed(&missing)?;
            if vectors.len() != missing.len() {
                return Err(SimilarityError::InvalidResponse(format!(
                    "{} vectors for {} texts",
                    vectors.len(),
                    missing.len()
                )));
            }
            let mut cache = self.cache.write().unwrap();
            for (text, v) in missing.into_iter().zip(vectors) {
                cache.insert((id.clone(), text), Arc::new(normalize(v)?));
            }
        }
        let cache = self.cache.read().unwrap();
        Ok(texts.iter().map(|t| cache[&key(t)].clone()).collect())
    }
}

fn normalize(v: Vec<f64>) -> Result<Vec<f64>, SimilarityError> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(SimilarityError::InvalidResponse("zero or non-finite vector".into()));
    }
    if (norm - 1.0).abs() <= 1e-9 {
        return Ok(v);
    }
    Ok(v.into_iter().map(|x| x / norm).collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    if a == b {
        return 1.0;
    }
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().clamp(-1.0, 1.0)
}

impl<E: Embedder> Similarity for EmbeddingSimilarity<E> {
    fn id(&self) -> &str {
        self.embedder.id()
    }

    fn matrix(&self, gen: &[String], gt: &[String]) -> Result<Vec<Vec<f64>>, SimilarityError> {
        let g = self.vectors(gen)?;
        let r = self.vectors(gt)?;
        Ok(g.iter()
            .map(|a| r.iter().map(|b| dot(a, b)).collect())
            .collect())
    }
}

pub const ENV_EMBED_URL: &str = "CQPITFALL_EMBED_URL";

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
    dim: usize,
    #[serde(default)]
    #[allow(dead_code)]
    model_id: Option<String>,
}

/// Client for an embedding service exposing `POST /embed`.
pub struct HttpEmbedder {
    base_url: String,
    agent: ureq::Agent,
    id: String,
    pub max_batch: usize,
}

impl HttpEmbedder {
    pub fn new(base_url: impl Into<String>) -> Self {
        let base_url = base_url.into().trim_end_matches('/').to_owned();
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .http_status_as_error(false)
            .build()
            .into();
        HttpEmbedder {
            id: format!("embed:{base_url}"),
            base_url,
            agent,
            max_batch: 64,
        }
    }

    pub fn from_env() -> Option<Self> {
        std::env::var(ENV_EMBED_URL).ok().map(Self::new)
    }

    fn batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, SimilarityError> {
        let mut response = self
            .agent
            .post(&format!("{}/embed", self.base_url))
            .send_json(EmbedRequest { texts })
            .map_err(|e| SimilarityError::Unreachable(e.to_string()))?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| SimilarityError::InvalidResponse(e.to_string()))?;
        if status != 200 {
            return Err(SimilarityError::Http { status, body });
        }
        let parsed: EmbedResponse = serde_json::from_str(&body)
            .map_err(|e| SimilarityError::InvalidResponse(e.to_string()))?;
        if parsed.vectors.len() != texts.len() || parsed.vectors.iter().any(|v| v.len() != parsed.dim) {
            return Err(SimilarityError::InvalidResponse(format!(
                "expected {} vectors of dimension {}",
                texts.len(),
                parsed.dim
            )));
        }
        Ok(parsed.vectors)
    }
}

impl Embedder for HttpEmbedder {
    fn id(&self) -> &str {
        &self.id
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, SimilarityError> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.max_batch.max(1)) {
            out.extend(self.batch(chunk)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jaccard_values() {
        assert_eq!(jaccard("a b c", "a b c"), 1.0);
        assert_eq!(jaccard("a b", "c d"), 0.0);
        assert_eq!(jaccard("a b", "b c"), 1.0 / 3.0);
        assert_eq!(jaccard("Is a?", "Is a!"), 1.0);
    }

    struct Count(std::sync::atomic::AtomicUsize);

    impl Embedder for Count {
        fn id(&self) -> &str {
            "count"
        }
        fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, SimilarityError> {
            self.0.fetch_add(texts.len(), std::sync::atomic::Ordering::SeqCst);
            Ok(texts.iter().map(|t| vec![t.len() as f64, 1.0]).collect())
        }
    }

    #[test]
    fn cache_avoids_recomputation_and_normalizes() {
        let s = EmbeddingSimilarity::new(Count(0.into()));
        let a = vec!["x".to_owned(), "yy".to_owned(), "x".to_owned()];
        let m = s.matrix(&a, &a).unwrap();
        assert!((m[0][0] - 1.0).abs() < 1e-12);
        assert!((m[0][2] - 1.0).abs() < 1e-12);
        s.matrix(&a, &a).unwrap();
        assert_eq!(s.embedder.0.load(std::sync::atomic::Ordering::SeqCst), 2);
        assert_eq!(s.cached(), 2);
    }
}
