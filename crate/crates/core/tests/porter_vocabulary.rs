use litmap_core::textlab::porter_stem;

#[test]
fn matches_reference_vocabulary() {
    let text = include_str!("../fixtures/porter/vocabulary.tsv");
    let mut mismatches = Vec::new();
    let mut n = 0;
    for line in text.lines() {
        let (word, stem) = line.split_once('\t').expect("word TAB stem");
        n += 1;
        let got = porter_stem(word);
        if got != stem {
            mismatches.push(format!("{word}: expected {stem}, got {got}"));
        }
    }
    assert!(n >= 2000);
    assert!(mismatches.is_empty(), "{} mismatches:\n{}", mismatches.len(), mismatches.join("\n"));
}
