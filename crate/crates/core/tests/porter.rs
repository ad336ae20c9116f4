use topicmine::textnorm::stem;

#[test]
fn matches_reference_stems() {
    let data = include_str!("data/porter_reference.txt");
    let mut mismatches = Vec::new();
    let mut n = 0;
    for line in data.lines().filter(|l| !l.starts_with('#')) {
        let (word, expected) = line.split_once(' ').unwrap();
        n += 1;
        let got = stem(word);
        if got != expected {
            mismatches.push(format!("{word}: got {got}, want {expected}"));
        }
    }
    assert!(n >= 200);
    assert!(mismatches.is_empty(), "{mismatches:#?}");
}

#[test]
fn documented_examples() {
    assert_eq!(stem("caresses"), "caress");
    assert_eq!(stem("die"), "die");
    assert_eq!(stem("walking"), "walk");
}

#[test]
fn non_ascii_passes_through() {
    assert_eq!(stem("café"), "café");
    assert_eq!(stem("Walking"), "Walking");
    assert_eq!(stem("r2d2"), "r2d2");
    assert_eq!(stem(""), "");
}
