//! Regenerates the bundled replay fixture.
//!
//! ```text
//! cargo run -p litmap-core --example gen_replay_fixture -- crates/core/fixtures/migration
//! ```
//!
//! Writes `replay.jsonl` (scoping searches plus a two-layer citer network)
//! and `decisions.jsonl` (a scripted single-reviewer screening session).

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use chrono::{Duration, TimeZone, Utc};
use litmap_core::corpus::{normalized_title, DocId, Document};
use litmap_core::harvest::ReplaySource;
use litmap_core::screening::{write_script, DecisionAction, DecisionInput, Pass, ScriptedDecision};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use uuid::{Builder, Uuid};

const SEED: u64 = 20_200_801;

const QUERIES: [&str; 11] = ["1_IMH", "2_IM", "2G", "2GD", "2GT", "3_RM", "3G", "3GD", "3GT", "4_UM", "4GT"];

fn genre(q: &str) -> char {
    q.chars().next().unwrap()
}

/// Singletons per query; 2_IM and 4_UM carry the distinct-document counts.
const SINGLETONS: [usize; 11] = [60, 70, 30, 30, 25, 60, 35, 35, 25, 97, 39];

/// Documents per hit count, for hits 1..=6.
const HITS: [usize; 7] = [0, 506, 196, 40, 10, 6, 2];

/// Title-pass groups 0..=4.
const TITLE_GROUPS: [usize; 5] = [223, 81, 137, 212, 107];
const FULLTEXT_CHECKS: usize = 204;
const PRUNED: usize = 100;

const LEE_CITERS: usize = 6592;
const LAYER2_POOL: usize = 4000;

struct Fixed {
    title: &'static str,
    year: i32,
    cited_by: u64,
    authors: &'static [&'static str],
    queries: &'static [&'static str],
    /// query where this title ranks first
    top_of: Option<&'static str>,
    title_group: u8,
}

const FIXED: &[Fixed] = &[
    Fixed { title: "The definition of housing market areas and strategic planning", year: 2002, cited_by: 113, authors: &["C Jones"], queries: &["3_RM", "3G", "3GD", "3GT", "1_IMH", "2GT"], top_of: None, title_group: 4 },
    Fixed { title: "Moving house, creating home: Exploring residential mobility", year: 2002, cited_by: 182, authors: &["A Winstanley", "DC Thorns", "HC Perkins"], queries: &["3_RM", "3G", "3GD", "3GT", "2GT", "4GT"], top_of: None, title_group: 4 },
    Fixed { title: "Intercensal mobility in a Victorian city", year: 1977, cited_by: 44, authors: &["R Dennis"], queries: &["3_RM", "3G", "3GD", "2G", "2GD"], top_of: None, title_group: 4 },
    Fixed { title: "In and out of Chinatown: Residential mobility and segregation of New York City's Chinese", year: 1991, cited_by: 173, authors: &["M Zhou", "JR Logan"], queries: &["3_RM", "3G", "3GT", "4GT", "2_IM"], top_of: None, title_group: 4 },
    Fixed { title: "Does land use planning shape regional economies? A simultaneous analysis of housing supply, internal migration and local employment growth in the Netherlands", year: 2009, cited_by: 63, authors: &["W Vermeulen", "J Van Ommeren"], queries: &["1_IMH", "2_IM", "2G", "2GT", "4GT"], top_of: Some("1_IMH"), title_group: 4 },
    Fixed { title: "Interregional migration and housing structure in an East European transition country: A view of Lithuania 2001-2008", year: 2009, cited_by: 29, authors: &["G Bloze"], queries: &["1_IMH", "2_IM", "2GD", "2GT", "3GT"], top_of: None, title_group: 4 },
    Fixed { title: "Ethnic segregation and residential mobility: relocations of minority ethnic groups in the Netherlands", year: 2010, cited_by: 138, authors: &["G Bolt", "R Van Kempen"], queries: &["3_RM", "3G", "3GT", "2G", "2GD"], top_of: None, title_group: 4 },
    Fixed { title: "Explanations for long-distance counter-urban migration into fringe areas in Denmark", year: 2011, cited_by: 43, authors: &["HS Andersen"], queries: &["1_IMH", "2_IM", "4_UM", "4GT", "2G"], top_of: None, title_group: 4 },
    Fixed { title: "Internal migration in developed countries", year: 1997, cited_by: 1090, authors: &["MJ Greenwood"], queries: &["2_IM", "2G"], top_of: Some("2_IM"), title_group: 4 },
    Fixed { title: "Migration in a mature economy: emigration and internal migration in England and Wales 1861-1900", year: 2003, cited_by: 396, authors: &["D Baines"], queries: &["2G", "2GD", "2_IM"], top_of: Some("2G"), title_group: 3 },
    Fixed { title: "Internal migration and ethnic groups: evidence for Britain from the 2001 Census", year: 2008, cited_by: 132, authors: &["N Finney", "L Simpson"], queries: &["2GD", "2G", "2GT", "1_IMH"], top_of: Some("2GD"), title_group: 4 },
    Fixed { title: "Population movement within the UK", year: 2005, cited_by: 117, authors: &["T Champion"], queries: &["2GT", "2G", "2GD"], top_of: Some("2GT"), title_group: 3 },
    Fixed { title: "Residential satisfaction as an intervening variable in residential mobility", year: 1974, cited_by: 876, authors: &["A Speare"], queries: &["3_RM", "3G"], top_of: Some("3_RM"), title_group: 4 },
    Fixed { title: "Tied down or room to move? Investigating the relationships between housing tenure, employment status and residential mobility in Britain", year: 2002, cited_by: 241, authors: &["R Böheim", "MP Taylor"], queries: &["3G", "3_RM", "3GD", "3GT"], top_of: Some("3G"), title_group: 4 },
    Fixed { title: "Life-cycle, housing tenure and intra-urban residential mobility: A causal model", year: 1973, cited_by: 86, authors: &["CG Pickvance"], queries: &["3GD", "3_RM", "3G", "4GT"], top_of: Some("3GD"), title_group: 3 },
    Fixed { title: "Spatial mobility, tenure mobility, and emerging social divisions in the UK housing market", year: 1987, cited_by: 82, authors: &["R Forrest"], queries: &["3GT", "3G"], top_of: Some("3GT"), title_group: 3 },
    Fixed { title: "The intra-urban migration process: a perspective", year: 1970, cited_by: 1223, authors: &["LA Brown", "EG Moore"], queries: &["4_UM", "4GT"], top_of: Some("4_UM"), title_group: 4 },
    Fixed { title: "Intra-urban migration and housing submarkets: Theory and evidence", year: 2004, cited_by: 99, authors: &["C Jones", "C Leishman"], queries: &["4GT", "3GT"], top_of: Some("4GT"), title_group: 3 },
    Fixed { title: "Selection bias from differential residential mobility as an explanation for associations of wire codes with childhood cancer", year: 1996, cited_by: 57, authors: &["RK Jones"], queries: &["3_RM"], top_of: None, title_group: 0 },
    Fixed { title: "Internal migration in the Klang Valley of Malaysia: Issues and implications", year: 1988, cited_by: 12, authors: &["K Ahmad"], queries: &["2_IM"], top_of: None, title_group: 0 },
    Fixed { title: "What's in a settlement? Domestic practice and residential mobility in Early Bronze Age southern England", year: 2005, cited_by: 21, authors: &["J Brück"], queries: &["3_RM"], top_of: None, title_group: 0 },
    Fixed { title: "Anglo-Saxon residential mobility at West Heslerton, North Yorkshire, UK from combined O-and Sr-isotope analysis", year: 2004, cited_by: 98, authors: &["J Montgomery"], queries: &["3G"], top_of: None, title_group: 0 },
    Fixed { title: "Moving away from silence: Music of the Peruvian Altiplano and the Experience of Urban Migration", year: 1993, cited_by: 420, authors: &["T Turino"], queries: &["4_UM"], top_of: None, title_group: 0 },
];

/// The first five fixed rows after the eighteen table rows are pruned.
const FIXED_PRUNED_FROM: usize = 18;

struct Notable {
    id: &'static str,
    title: &'static str,
    year: i32,
    cited_by: u64,
    author: &'static str,
    venue: &'static str,
}

const NOTABLES: [Notable; 4] = [
    Notable { id: "n-ravenstein1885", title: "The Laws of Migration", year: 1885, cited_by: 5012, author: "EG Ravenstein", venue: "Journal of the statistical society of London" },
    Notable { id: "n-sjaastad1962", title: "The costs and returns of human migration", year: 1962, cited_by: 6057, author: "LA Sjaastad", venue: "Journal of Political Economy" },
    Notable { id: "n-lee1966", title: "A Theory of Migration", year: 1966, cited_by: 6592, author: "ES Lee", venue: "Demography" },
    Notable { id: "n-rossi1980", title: "Why families move", year: 1980, cited_by: 1833, author: "PH Rossi", venue: "SAGE Publications" },
];

const EN_TOPICS: &[&str] = &[
    "housing tenure", "residential mobility", "internal migration", "labour market flexibility", "house prices",
    "commuting behaviour", "gentrification", "household formation", "urban growth", "rural depopulation",
    "ethnic segregation", "social housing", "migration intentions", "return migration", "population change",
    "family migration", "student migration", "retirement migration", "homeownership", "private renting",
    "housing affordability", "regional inequality", "neighbourhood change", "spatial mobility", "life course transitions",
    "leaving home", "housing careers", "suburbanisation", "counterurbanisation", "interregional migration",
    "local housing markets", "employment growth", "migrant networks", "ageing in place", "housing supply",
    "planning policy", "urban regeneration", "displacement", "immigrant settlement", "housing wealth",
    "tenure choice", "job mobility", "wage differentials", "population ageing", "mortgage markets",
];

const EN_PLACES: &[&str] = &[
    "Britain", "England and Wales", "Scotland", "the Netherlands", "Sweden", "Germany", "China", "Australia",
    "the United States", "Canada", "Spain", "Italy", "Poland", "Lithuania", "Denmark", "Norway", "New Zealand",
    "Japan", "South Korea", "Brazil", "Mexico", "South Africa", "India", "Ireland", "Finland", "France", "Chile",
    "Russia", "Hungary", "Estonia", "London", "Glasgow", "Beijing", "Shanghai", "Toronto", "Sydney",
];

const EN_FRAMES: &[&str] = &[
    "evidence from panel data", "a longitudinal analysis", "a spatial econometric approach", "a review",
    "new evidence from census microdata", "theory and evidence", "a life course perspective", "a comparative study",
    "a multilevel analysis", "the role of local context", "an agent-based model", "lessons for policy",
    "a qualitative study", "trends and determinants", "a gravity model approach", "insights from register data",
    "a mixed methods study", "a critical assessment", "patterns and processes", "measurement and meaning",
];

const ZH_TOPICS: &[&str] = &[
    "住房价格", "人口迁移", "城市化", "户籍制度", "流动人口", "住房保障", "居住选择", "劳动力流动", "城乡差距",
    "租赁市场", "城中村", "老龄化", "家庭迁移", "房地产市场", "区域发展", "社会融合",
];
const ZH_PLACES: &[&str] = &["北京", "上海", "广州", "深圳", "长三角", "珠三角", "京津冀", "西部地区", "东北地区", "中国"];
const ZH_FRAMES: &[&str] = &["实证研究", "影响因素分析", "空间格局", "理论与实践", "调查研究", "时空演变"];

const DE_TOPICS: &[&str] = &[
    "Wohnungsmarkt", "Binnenwanderung", "Wohnmobilität", "Mietpreise", "Stadtentwicklung", "Zuwanderung",
    "Wohneigentum", "Segregation", "Abwanderung", "Haushaltsbildung", "Pendelverkehr", "Bevölkerungsentwicklung",
];
const DE_PLACES: &[&str] = &["Deutschland", "Ostdeutschland", "Berlin", "Hamburg", "Österreich", "der Schweiz", "Bayern", "Sachsen"];

const ES_TOPICS: &[&str] = &[
    "la vivienda", "las migraciones internas", "la movilidad residencial", "el mercado de alquiler", "la segregación urbana",
    "la despoblación rural", "la inmigración", "el crecimiento urbano", "la emancipación juvenil", "el precio del suelo",
];
const ES_PLACES: &[&str] = &["España", "México", "Chile", "Argentina", "Colombia", "Perú", "Madrid", "Barcelona"];

const FR_TOPICS: &[&str] = &[
    "le logement", "les migrations internes", "la mobilité résidentielle", "la ségrégation urbaine", "la périurbanisation",
    "les trajectoires résidentielles", "le marché immobilier", "l'exode rural", "la gentrification", "les ménages immigrés",
];
const FR_PLACES: &[&str] = &["France", "Île-de-France", "Paris", "Lyon", "Québec", "Belgique", "Marseille", "Afrique de l'Ouest"];

const PT_TOPICS: &[&str] = &[
    "a habitação", "as migrações internas", "a mobilidade residencial", "a segregação urbana", "o mercado de arrendamento",
    "o êxodo rural", "a expansão urbana", "as favelas", "a emigração", "o preço dos terrenos",
];
const PT_PLACES: &[&str] = &["Portugal", "Brasil", "Lisboa", "Porto", "São Paulo", "Rio de Janeiro", "Minas Gerais", "Angola"];

const SURNAMES: &[&str] = &[
    "Smith", "Clark", "Boyle", "Champion", "Fielding", "Findlay", "Gordon", "Hughes", "McCollum", "Mulder", "Coulter",
    "Van Ham", "Feijten", "Kley", "Stockdale", "Dorling", "Rees", "Bell", "Stillwell", "Cooke", "Wang", "Li", "Zhang",
    "Chen", "Liu", "Müller", "Schmidt", "Kalter", "García", "López", "Martin", "Dubois", "Silva", "Santos", "Andersson",
    "Lindgren", "Niedomysl", "Hedman", "Ham", "Thomas", "Dieleman", "Kim", "Sato", "Nowak", "Kowalski",
];

const VENUES: &[&str] = &[
    "Urban Studies", "Housing Studies", "Environment and Planning A", "Population, Space and Place", "Regional Studies",
    "Journal of Regional Science", "Demography", "Population Studies", "Journal of Urban Economics", "Applied Geography",
    "Transactions of the Institute of British Geographers", "Journal of Housing Economics", "Urban Geography",
    "International Migration Review", "Journal of Ethnic and Migration Studies", "Geoforum", "Cities", "Area",
];

struct Gen {
    rng: ChaCha8Rng,
    titles: HashSet<String>,
}

impl Gen {
    fn pick<'a>(&mut self, xs: &[&'a str]) -> &'a str {
        xs[self.rng.gen_range(0..xs.len())]
    }

    fn authors(&mut self) -> Vec<String> {
        let n = self.rng.gen_range(1..=3);
        (0..n)
            .map(|_| {
                let initial = (b'A' + self.rng.gen_range(0..26u8)) as char;
                format!("{initial} {}", self.pick(SURNAMES))
            })
            .collect()
    }

    fn heavy_tail(&mut self, scale: f64) -> u64 {
        let u: f64 = self.rng.gen();
        ((u * scale).exp() - 1.0).floor() as u64
    }

    fn raw_title(&mut self, lang: &str) -> String {
        match lang {
            "zh" => {
                let (a, b) = (self.pick(ZH_TOPICS), self.pick(ZH_TOPICS));
                match self.rng.gen_range(0..3) {
                    0 => format!("{}{}与{}{}", self.pick(ZH_PLACES), a, b, self.pick(ZH_FRAMES)),
                    1 => format!("{a}对{b}的影响：以{}为例", self.pick(ZH_PLACES)),
                    _ => format!("{}{}的{}", self.pick(ZH_PLACES), a, self.pick(ZH_FRAMES)),
                }
            }
            "de" => format!("{} und {} in {}", self.pick(DE_TOPICS), self.pick(DE_TOPICS), self.pick(DE_PLACES)),
            "es" => format!("{} y {} en {}", cap(self.pick(ES_TOPICS)), self.pick(ES_TOPICS), self.pick(ES_PLACES)),
            "fr" => format!("{} et {} en {}", cap(self.pick(FR_TOPICS)), self.pick(FR_TOPICS), self.pick(FR_PLACES)),
            "pt" => format!("{} e {} em {}", cap(self.pick(PT_TOPICS)), self.pick(PT_TOPICS), self.pick(PT_PLACES)),
            _ => {
                let (a, b) = (self.pick(EN_TOPICS), self.pick(EN_TOPICS));
                let t = match self.rng.gen_range(0..7) {
                    0 => format!("{a} and {b} in {}", self.pick(EN_PLACES)),
                    1 => format!("{a} and {b}: {}", self.pick(EN_FRAMES)),
                    2 => format!("The effect of {a} on {b} in {}", self.pick(EN_PLACES)),
                    3 => format!("{a} in {}: {}", self.pick(EN_PLACES), self.pick(EN_FRAMES)),
                    4 => format!("Understanding {a}: {}", self.pick(EN_FRAMES)),
                    5 => format!("{a}, {b} and {}", self.pick(EN_TOPICS)),
                    _ => format!("Does {a} shape {b}? {}", cap(self.pick(EN_FRAMES))),
                };
                cap(&t)
            }
        }
    }

    /// A title whose normalized form is new.
    fn title(&mut self, lang: &str) -> String {
        loop {
            let t = self.raw_title(lang);
            if self.titles.insert(normalized_title(&t)) {
                return t;
            }
        }
    }

    fn language(&mut self, non_english: f64) -> &'static str {
        if self.rng.gen::<f64>() >= non_english {
            return "en";
        }
        match self.rng.gen_range(0..100) {
            0..=34 => "zh",
            35..=52 => "de",
            53..=70 => "es",
            71..=85 => "fr",
            _ => "pt",
        }
    }

    fn uuid(&mut self) -> Uuid {
        let mut bytes = [0u8; 16];
        self.rng.fill_bytes(&mut bytes);
        Builder::from_random_bytes(bytes).into_uuid()
    }
}

fn cap(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Gale–Ryser: can rows with these degrees be placed into columns with
/// these capacities, at most one per cell?
fn feasible(rows: &[usize], caps: &[usize]) -> bool {
    let mut a = rows.to_vec();
    a.sort_unstable_by(|x, y| y.cmp(x));
    if a.iter().sum::<usize>() != caps.iter().sum::<usize>() {
        return false;
    }
    let mut lhs = 0;
    for (k, d) in a.iter().enumerate() {
        lhs += d;
        let rhs: usize = caps.iter().map(|c| (*c).min(k + 1)).sum();
        if lhs > rhs {
            return false;
        }
    }
    true
}

fn main() {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "crates/core/fixtures/migration".into()).into();
    std::fs::create_dir_all(&out).expect("output directory");
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(SEED), titles: HashSet::new() };
    let qi = |q: &str| QUERIES.iter().position(|x| *x == q).unwrap();

    // scoping documents: fixed rows first, then generated ones
    let mut docs: Vec<Document> = Vec::new();
    let mut fingerprints: Vec<BTreeSet<usize>> = Vec::new();
    let mut caps = [100usize; 11];
    for (i, f) in FIXED.iter().enumerate() {
        assert!(g.titles.insert(normalized_title(f.title)), "duplicate fixed title");
        let doc = Document::new(format!("s{:04}", i + 1), f.title, Some(f.year))
            .with_cited_by(f.cited_by)
            .with_authors(f.authors.iter().copied());
        docs.push(doc);
        let fp: BTreeSet<usize> = f.queries.iter().map(|q| qi(q)).collect();
        for q in &fp {
            caps[*q] -= 1;
        }
        fingerprints.push(fp);
    }
    let mut hits_left = HITS;
    for fp in &fingerprints {
        hits_left[fp.len()] -= 1;
    }
    let mut singles = SINGLETONS;
    for fp in &fingerprints {
        if fp.len() == 1 {
            singles[*fp.iter().next().unwrap()] -= 1;
        }
    }
    assert_eq!(singles.iter().sum::<usize>(), hits_left[1]);
    for q in 0..11 {
        caps[q] -= singles[q];
    }

    // multi-query documents, most hits first
    let mut degrees: Vec<usize> = Vec::new();
    for h in (2..=6).rev() {
        degrees.extend(std::iter::repeat_n(h, hits_left[h]));
    }
    let mut multi: Vec<BTreeSet<usize>> = Vec::new();
    for (n, &h) in degrees.iter().enumerate() {
        let rest = &degrees[n + 1..];
        let mut chosen = None;
        for _ in 0..200 {
            let mut pick: BTreeSet<usize> = BTreeSet::new();
            let mut first = None;
            while pick.len() < h {
                let weights: Vec<f64> = (0..11)
                    .map(|q| {
                        if pick.contains(&q) || caps[q] == 0 {
                            return 0.0;
                        }
                        let affinity = match first {
                            Some(f) if genre(QUERIES[f]) == genre(QUERIES[q]) => 6.0,
                            _ => 1.0,
                        };
                        caps[q] as f64 * affinity
                    })
                    .collect();
                if weights.iter().all(|w| *w == 0.0) {
                    break;
                }
                let dist = rand::distributions::WeightedIndex::new(&weights).unwrap();
                let q = dist.sample(&mut g.rng);
                first.get_or_insert(q);
                pick.insert(q);
            }
            if pick.len() < h {
                continue;
            }
            let mut next = caps;
            for q in &pick {
                next[*q] -= 1;
            }
            if feasible(rest, &next) {
                chosen = Some(pick);
                break;
            }
        }
        let pick = chosen.unwrap_or_else(|| {
            let mut order: Vec<usize> = (0..11).collect();
            order.sort_by(|a, b| caps[*b].cmp(&caps[*a]).then(a.cmp(b)));
            order.into_iter().take(h).collect()
        });
        for q in &pick {
            caps[*q] -= 1;
        }
        multi.push(pick);
    }
    assert!(caps.iter().all(|c| *c == 0), "capacities not exhausted: {caps:?}");
    for (q, n) in singles.iter().enumerate() {
        for _ in 0..*n {
            multi.push(BTreeSet::from([q]));
        }
    }
    multi.shuffle(&mut g.rng);
    for fp in multi {
        let lang = g.language(0.03);
        let year = g.rng.gen_range(1965..=2020);
        let doc = Document::new(format!("s{:04}", docs.len() + 1), g.title(lang), Some(year))
            .with_cited_by(g.heavy_tail(6.5))
            .with_authors(g.authors())
            .with_venue(g.pick(VENUES));
        docs.push(doc);
        fingerprints.push(fp);
    }
    assert_eq!(docs.len(), 760);

    // rankings: fixed first places, then citation-weighted noise
    let mut src = ReplaySource::new();
    for (q, name) in QUERIES.iter().enumerate() {
        let mut members: Vec<(f64, usize)> = fingerprints
            .iter()
            .enumerate()
            .filter(|(_, fp)| fp.contains(&q))
            .map(|(i, _)| {
                let top = i < FIXED.len() && FIXED[i].top_of == Some(name);
                let noise: f64 = g.rng.gen::<f64>() * 4.0;
                let key = if top { f64::INFINITY } else { (docs[i].cited_by as f64 + 1.0).ln() + noise };
                (key, i)
            })
            .collect();
        members.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        assert_eq!(members.len(), 100, "{name}");
        src.set_search(*name, members.iter().map(|(_, i)| docs[*i].doc_id.clone()).collect());
    }

    // title-pass groups
    let mut relevance: Vec<(f64, usize)> = (FIXED.len()..docs.len())
        .map(|i| {
            let fp = &fingerprints[i];
            let mut r: f64 = g.rng.gen::<f64>() * 3.0 + fp.len() as f64 * 0.6;
            if fp.len() == 1 && (fp.contains(&qi("4_UM")) || fp.contains(&qi("2_IM"))) {
                r -= 1.0;
            }
            if fp.iter().any(|q| QUERIES[*q].ends_with('T')) {
                r += 0.8;
            }
            (r, i)
        })
        .collect();
    relevance.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut title_group = vec![0u8; docs.len()];
    let mut quota = TITLE_GROUPS;
    for (i, f) in FIXED.iter().enumerate() {
        title_group[i] = f.title_group;
        quota[f.title_group as usize] -= 1;
    }
    let mut cursor = relevance.iter();
    for grp in (0..=4).rev() {
        for _ in 0..quota[grp] {
            let (_, i) = cursor.next().unwrap();
            title_group[*i] = grp as u8;
        }
    }

    // deeper checks: which pooled titles fail, and which get full text
    let pooled: Vec<usize> = (0..docs.len()).filter(|i| title_group[*i] <= 2).collect();
    assert_eq!(pooled.len(), 441);
    let mut excluded: BTreeSet<usize> = (FIXED_PRUNED_FROM..FIXED.len()).collect();
    let candidates: Vec<usize> = pooled.iter().copied().filter(|i| !excluded.contains(i)).collect();
    let weight = |i: usize| -> f64 {
        let base = [6.0, 2.0, 1.0][title_group[i] as usize];
        if fingerprints[i].contains(&qi("4_UM")) { base * 2.0 } else { base }
    };
    let extra: Vec<usize> = candidates
        .choose_multiple_weighted(&mut g.rng, PRUNED - excluded.len(), |i| weight(*i))
        .unwrap()
        .copied()
        .collect();
    excluded.extend(extra);
    assert_eq!(excluded.len(), PRUNED);
    let fulltext: BTreeSet<usize> = pooled
        .choose_multiple_weighted(&mut g.rng, FULLTEXT_CHECKS, |i| if title_group[*i] == 2 { 2.0 } else { 1.0 })
        .unwrap()
        .copied()
        .collect();

    // scripted screening session
    let start = Utc.with_ymd_and_hms(2020, 6, 1, 9, 0, 0).unwrap();
    let mut script = Vec::new();
    let mut order: Vec<usize> = (0..docs.len()).collect();
    order.shuffle(&mut g.rng);
    let mut push = |g: &mut Gen, i: usize, pass: Pass, group: u8| {
        let n = script.len() as i64;
        script.push(ScriptedDecision {
            input: DecisionInput {
                decision_id: Some(g.uuid()),
                doc_id: docs[i].doc_id.clone(),
                pass,
                reviewer: "r1".into(),
                group: i64::from(group),
                note: None,
            },
            decided_at: start + Duration::seconds(45 * n),
            action: DecisionAction::Review,
        });
    };
    for &i in &order {
        push(&mut g, i, Pass::Title, title_group[i]);
    }
    let mut deeper: Vec<usize> = pooled.clone();
    deeper.shuffle(&mut g.rng);
    for i in deeper {
        let pass = if fulltext.contains(&i) { Pass::Fulltext } else { Pass::Abstract };
        let group = if excluded.contains(&i) { 0 } else { g.rng.gen_range(1..=4) };
        push(&mut g, i, pass, group);
    }

    // citation network
    let seeds: Vec<usize> = (0..docs.len()).filter(|i| !excluded.contains(i)).collect();
    assert_eq!(seeds.len(), 660);
    for d in &docs {
        src.add_document(d.clone());
    }
    for n in &NOTABLES {
        assert!(g.titles.insert(normalized_title(n.title)));
        let d = Document::new(n.id, n.title, Some(n.year))
            .with_cited_by(n.cited_by)
            .with_authors([n.author])
            .with_venue(n.venue);
        src.add_document(d);
    }
    let mut layer1: Vec<Document> = Vec::with_capacity(LEE_CITERS);
    for i in 0..LEE_CITERS {
        let lang = g.language(0.12);
        let d = Document::new(format!("c1-{:05}", i + 1), g.title(lang), Some(g.rng.gen_range(1967..=2020)))
            .with_cited_by(g.heavy_tail(7.0))
            .with_authors(g.authors())
            .with_venue(g.pick(VENUES));
        layer1.push(d);
    }
    // Ravenstein's second paper reuses the first one's title
    let sequel = Document::new("c1-r1889", "The laws of migration", Some(1889))
        .with_cited_by(3109)
        .with_authors(["EG Ravenstein"])
        .with_venue("Journal of the royal statistical society");
    let mut layer2: Vec<Document> = Vec::with_capacity(LAYER2_POOL);
    for i in 0..LAYER2_POOL {
        let lang = g.language(0.15);
        let d = Document::new(format!("c2-{:05}", i + 1), g.title(lang), Some(g.rng.gen_range(1970..=2021)))
            .with_cited_by(g.heavy_tail(5.0))
            .with_authors(g.authors())
            .with_venue(g.pick(VENUES));
        layer2.push(d);
    }
    for d in layer1.iter().chain(layer2.iter()).chain([&sequel]) {
        src.add_document(d.clone());
    }

    let mut lee: Vec<DocId> = layer1.iter().map(|d| d.doc_id.clone()).collect();
    lee.shuffle(&mut g.rng);
    src.set_citers("n-lee1966", lee);
    let pick_citers = |g: &mut Gen, pool: &[Document], year: i32, n: usize| -> Vec<DocId> {
        let mut out: BTreeSet<DocId> = BTreeSet::new();
        let mut tries = 0;
        while out.len() < n && tries < n * 20 {
            tries += 1;
            let d = &pool[g.rng.gen_range(0..pool.len())];
            if d.year.unwrap_or(0) >= year {
                out.insert(d.doc_id.clone());
            }
        }
        let mut v: Vec<DocId> = out.into_iter().collect();
        v.shuffle(&mut g.rng);
        v
    };
    for n in NOTABLES.iter().filter(|n| n.id != "n-lee1966") {
        let mut list = pick_citers(&mut g, &layer1, n.year, 150);
        if n.id == "n-ravenstein1885" {
            list.insert(3, DocId::from("c1-r1889"));
        }
        src.set_citers(n.id, list);
    }
    for &i in &seeds {
        let d = &docs[i];
        let n = (d.cited_by as usize).min(g.rng.gen_range(0..=8));
        if n > 0 {
            let list = pick_citers(&mut g, &layer1, d.year.unwrap(), n);
            src.set_citers(d.doc_id.as_str(), list);
        }
    }
    for d in &layer1 {
        if g.rng.gen::<f64>() < 0.55 {
            let n = g.rng.gen_range(1..=6);
            let mut list = pick_citers(&mut g, &layer2, d.year.unwrap(), n);
            if g.rng.gen::<f64>() < 0.05 {
                list.extend(pick_citers(&mut g, &layer1, d.year.unwrap(), 1).into_iter().filter(|c| c != &d.doc_id));
            }
            if !list.is_empty() {
                src.set_citers(d.doc_id.as_str(), list);
            }
        }
    }

    // self-checks against the target tallies
    let mut hist = [0usize; 7];
    let mut per_query: BTreeMap<&str, usize> = BTreeMap::new();
    for fp in &fingerprints {
        hist[fp.len()] += 1;
        for q in fp {
            *per_query.entry(QUERIES[*q]).or_default() += 1;
        }
    }
    assert_eq!(hist, HITS);
    assert!(per_query.values().all(|n| *n == 100));
    let only = |q: &str| fingerprints.iter().filter(|fp| fp.len() == 1 && fp.contains(&qi(q))).count();
    assert_eq!((only("4_UM"), only("2_IM")), (97, 70));

    let replay = out.join("replay.jsonl");
    src.write(BufWriter::new(File::create(&replay).unwrap())).unwrap();
    let decisions = out.join("decisions.jsonl");
    write_script(&script, BufWriter::new(File::create(&decisions).unwrap())).unwrap();
    eprintln!(
        "wrote {} ({} documents), {} ({} decisions)",
        replay.display(),
        src.documents().count(),
        decisions.display(),
        script.len()
    );
}
