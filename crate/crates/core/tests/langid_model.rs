mod common;

use corpusforge::langid::{self, FeatureSelectionCriteria, LangIdModel, TrainerConfig};

#[test]
fn model_file_round_trips() {
    let model = common::fixture_model();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fixture.lidm");
    model.save(&path).unwrap();
    let loaded = LangIdModel::load(&path).unwrap();
    assert_eq!(loaded.labels(), model.labels());
    assert_eq!(loaded.features(), model.features());
    for doc in common::langid_corpus().iter().step_by(37) {
        assert_eq!(loaded.classify(&doc.text), model.classify(&doc.text));
    }
}

#[test]
fn training_ignores_thread_count() {
    let corpus = common::langid_corpus();
    let train = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                langid::train_from_corpus(&corpus, &FeatureSelectionCriteria::default(), &TrainerConfig::default())
                    .unwrap()
            })
    };
    let (a, b) = (train(1), train(4));
    let mut bytes = (Vec::new(), Vec::new());
    a.write_to(&mut bytes.0).unwrap();
    b.write_to(&mut bytes.1).unwrap();
    assert_eq!(bytes.0, bytes.1);
}

#[test]
fn fixture_model_separates_the_five_languages() {
    let model = common::fixture_model();
    let mut labels = model.labels().to_vec();
    labels.sort();
    assert_eq!(labels, ["de", "en", "ja", "ko", "zh"]);
    assert_eq!(model.classify("今日はとても良い天気ですね。散歩に行きましょう。").0, "ja");
    assert_eq!(model.classify("The weather is lovely today, shall we go for a walk?").0, "en");
    assert_eq!(model.classify("   ").0, langid::UNDETERMINED);
}

#[test]
fn rapid_gate_agrees_with_the_precise_path_on_the_fixture() {
    let model = common::fixture_model();
    let pages = common::e2e_pages();
    let (mut rapid, mut precise) = (Vec::new(), Vec::new());
    for p in pages.iter().filter(|p| p.content_type.starts_with("text/html")) {
        rapid.push(langid::rapid_japanese_check(&p.body, &model));
        let text = corpusforge::extract::extract_main_text(&p.body, &p.url).text;
        precise.push(model.classify(&text).0 == langid::JAPANESE);
    }
    let agreement = langid::gate_agreement(&rapid, &precise);
    // The gate may let through pages the classifier later rejects, but must
    // not drop Japanese pages.
    assert_eq!(agreement.recall, 1.0);
}
