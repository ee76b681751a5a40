//! Seeded synthetic news corpora with a matching gazetteer, for tests,
//! benchmarks and smoke runs.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, CorpusStyle, Document, Split};
use crate::ner::{GazetteerTagger, Label};

const FIRST: &[&str] = &["Angela", "Barack", "Maria", "Kofi", "Elena", "Rahul", "Sofia", "Tomas", "Amara", "Kenji", "Lucia", "Omar", "Ingrid", "Pablo"];
const LAST: &[&str] = &["Okafor", "Lindqvist", "Moreau", "Tanaka", "Haddad", "Novak", "Ferreira", "Kowalski", "Brennan", "Castillo", "Mensah", "Varga"];
const PLACES: &[&str] = &["Lisbon", "Nairobi", "Oslo", "Quito", "Hanoi", "Toronto", "Valletta", "Tbilisi", "Lagos", "Perth", "Bergen", "Seville"];
const ORGS: &[&str] = &["Harbor Council", "Northfield United", "Civic Theatre Company", "Riverside Hospital", "Summit Bank", "Coastal Guard", "Metro Transit"];
const FACILITIES: &[&str] = &["Grand Arena", "Old Bridge", "Union Station", "Central Library", "Lakeside Stadium", "Hilltop Museum"];
const DAYS: &[&str] = &["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"];

const OPENERS: &[&str] = &["Officials", "Residents", "Critics", "Organizers", "Analysts", "Witnesses", "Supporters", "Volunteers", "Reporters", "Neighbors"];
const FILLER: &[&str] = &[
    "said", "the", "new", "plan", "would", "take", "effect", "after", "a", "long", "debate", "over", "costs", "and", "schedules", "while",
    "many", "people", "waited", "outside", "for", "hours", "in", "cold", "weather", "with", "little", "news", "about", "what", "comes", "next",
    "as", "crowds", "gathered", "near", "entrance", "to", "hear", "speeches", "from", "local", "leaders", "who", "promised", "changes", "soon",
    "before", "end", "of", "season", "budget", "vote", "was", "delayed", "again", "by", "several", "weeks", "during", "tense", "meeting",
];

/// Parameters of a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthConfig {
    pub docs: usize,
    pub seed: u64,
    pub style: CorpusStyle,
    pub min_sentences: usize,
    pub max_sentences: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { docs: 200, seed: 13, style: CorpusStyle::GoodNews, min_sentences: 18, max_sentences: 40 }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub gazetteer: Vec<(String, Label)>,
}

impl SyntheticCorpus {
    /// Dictionary tagger over the gazetteer plus the built-in rules.
    pub fn tagger(&self) -> GazetteerTagger {
        GazetteerTagger::from_entries(self.gazetteer.iter().map(|(s, l)| (s.clone(), *l)))
    }

    /// The gazetteer in `surface<TAB>LABEL` form.
    pub fn gazetteer_text(&self) -> String {
        self.gazetteer.iter().map(|(s, l)| format!("{s}\t{}\n", l.as_str())).collect()
    }
}

fn gazetteer() -> Vec<(String, Label)> {
    let mut g: Vec<(String, Label)> = Vec::new();
    for f in FIRST {
        for l in LAST {
            g.push((format!("{f} {l}"), Label::Person));
        }
    }
    g.extend(PLACES.iter().map(|p| (p.to_string(), Label::Gpe)));
    g.extend(ORGS.iter().map(|o| (o.to_string(), Label::Org)));
    g.extend(FACILITIES.iter().map(|f| (f.to_string(), Label::Fac)));
    g
}

fn filler(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    (0..n).map(|_| FILLER.choose(rng).expect("non-empty").to_string()).collect()
}

fn sentence(rng: &mut ChaCha8Rng, mention: Option<&str>, day: Option<&str>) -> String {
    let len = rng.gen_range(8..22);
    let mut words = vec![OPENERS.choose(rng).expect("non-empty").to_string()];
    words.extend(filler(rng, len));
    if let Some(m) = mention {
        let at = rng.gen_range(2..words.len());
        words.insert(at, m.to_string());
    }
    if let Some(d) = day {
        words.push("on".into());
        words.push(d.to_string());
    }
    format!("{}.", words.join(" "))
}

fn split_for(i: usize, n: usize) -> Split {
    match (i * 10) / n.max(1) {
        0..=7 => Split::Train,
        8 => Split::Validation,
        _ => Split::Test,
    }
}

/// Generates a corpus. Each article mentions a handful of topic entities
/// in a minority of its sentences; the caption names one to three of
/// them, occasionally one the article never mentions, and sometimes only a
/// day of the week.
pub fn generate(config: &SynthConfig) -> SyntheticCorpus {
    let gazetteer = gazetteer();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut docs = Vec::with_capacity(config.docs);
    for i in 0..config.docs {
        let topics: Vec<&str> = gazetteer.choose_multiple(&mut rng, 5).map(|(s, _)| s.as_str()).collect();
        let n_sent = rng.gen_range(config.min_sentences..=config.max_sentences.max(config.min_sentences));
        let day = *DAYS.choose(&mut rng).expect("non-empty");
        let sentences: Vec<String> = (0..n_sent)
            .map(|k| {
                let mention = (k == 0 || rng.gen_bool(0.12)).then(|| topics[rng.gen_range(0..4)]);
                let dated = rng.gen_bool(0.1).then_some(day);
                sentence(&mut rng, mention, dated)
            })
            .collect();
        let article = sentences.join(" ");

        let caption = if rng.gen_bool(0.08) {
            format!("A crowd gathers on {day}.")
        } else {
            let k = rng.gen_range(1..=3);
            let mut named: Vec<&str> = topics[..4].choose_multiple(&mut rng, k).copied().collect();
            if rng.gen_bool(0.2) {
                named.push(topics[4]);
            }
            format!("{} during the event on {day}.", named.join(" and "))
        };
        let words = article.split_whitespace().count();
        let image_position = match config.style {
            CorpusStyle::NyTimes => Some(rng.gen_range(0..words)),
            _ => None,
        };
        docs.push(Document::new(format!("syn{i:04}"), article, caption, format!("img/syn{i:04}.jpg"), image_position, split_for(i, config.docs)));
    }
    let corpus = Corpus::from_documents(config.style, docs).expect("synthetic ids are unique");
    SyntheticCorpus { corpus, gazetteer }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let a = generate(&SynthConfig { docs: 5, ..Default::default() });
        let b = generate(&SynthConfig { docs: 5, ..Default::default() });
        assert_eq!(a.corpus.documents(), b.corpus.documents());
        let c = generate(&SynthConfig { docs: 5, seed: 14, ..Default::default() });
        assert_ne!(a.corpus.documents(), c.corpus.documents());
    }

    #[test]
    fn segmentation_matches_construction() {
        let s = generate(&SynthConfig { docs: 10, ..Default::default() });
        for doc in s.corpus.iter() {
            let periods = doc.article_text.matches('.').count();
            assert_eq!(doc.sentences.len(), periods);
        }
    }

    #[test]
    fn nytimes_has_positions() {
        let s = generate(&SynthConfig { docs: 3, style: CorpusStyle::NyTimes, ..Default::default() });
        assert!(s.corpus.iter().all(|d| d.image_position.is_some()));
    }
}
