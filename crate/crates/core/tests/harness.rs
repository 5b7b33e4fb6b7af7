use langspread::corpus::SplitPart;
use langspread::harness::{
    default_grid, evaluate, grid_search, multi_seed_eval, run_config, train_and_test, EarlyStopping, ExperimentData,
    TrainConfig,
};
use langspread::model::{build_instances, EncodedInstance, FakeNewsModel, ModelConfig, Setup};
use langspread::synth::{synthetic_dataset, SynthOptions};

struct Splits {
    train: Vec<EncodedInstance>,
    val: Vec<EncodedInstance>,
    test: Vec<EncodedInstance>,
    vocab: usize,
}

fn splits_of(news: usize, signal: f64, setup: Setup) -> Splits {
    let ds = synthetic_dataset(&SynthOptions {
        news,
        signal,
        ..SynthOptions::default()
    })
    .unwrap();
    Splits {
        train: build_instances(&ds, setup, SplitPart::Train),
        val: build_instances(&ds, setup, SplitPart::Val),
        test: build_instances(&ds, setup, SplitPart::Test),
        vocab: ds.vocab.len(),
    }
}

fn splits(signal: f64, setup: Setup) -> Splits {
    splits_of(80, signal, setup)
}

impl Splits {
    fn data(&self) -> ExperimentData<'_> {
        ExperimentData {
            train: &self.train,
            val: &self.val,
            test: &self.test,
            embeddings: None,
        }
    }
}

fn small(setup: Setup, vocab: usize) -> ModelConfig {
    ModelConfig {
        embedding_dim: 12,
        ..ModelConfig::new(setup, vocab)
    }
}

#[test]
fn patience_one_stops_after_second_epoch() {
    let mut stop = EarlyStopping::new(1);
    let first = stop.observe(1, 0.9);
    assert!(first.improved && !first.stop);
    let second = stop.observe(2, 0.8);
    assert!(!second.improved && second.stop);
    assert_eq!(stop.best_epoch(), 1);
}

#[test]
fn reported_metrics_come_from_the_best_epoch() {
    let s = splits(0.08, Setup::NewsTl);
    let cfg = TrainConfig {
        patience: 4,
        max_epochs: 12,
        ..TrainConfig::default()
    };
    let mut model = FakeNewsModel::new(small(Setup::NewsTl, s.vocab), None).unwrap();
    let run = train_and_test(&mut model, &s.train, &s.val, &s.test, &cfg).unwrap();
    let best = run.epochs.iter().map(|e| e.val.f1).fold(f64::NEG_INFINITY, f64::max);
    let first_best = run.epochs.iter().find(|e| e.val.f1 == best).unwrap();
    assert_eq!(run.best_epoch, first_best.epoch);
    assert_eq!(run.best_val, first_best.val);
    assert_eq!(evaluate(&model, &s.val).unwrap(), run.best_val);
    assert_eq!(evaluate(&model, &s.test).unwrap(), run.test.unwrap());
}

#[test]
fn same_seed_same_run() {
    let s = splits(0.2, Setup::De);
    let cfg = TrainConfig {
        max_epochs: 5,
        ..TrainConfig::default()
    };
    let a = run_config(s.data(), &small(Setup::De, s.vocab), &cfg).unwrap();
    let b = run_config(s.data(), &small(Setup::De, s.vocab), &cfg).unwrap();
    assert_eq!(a.1, b.1);
    assert_eq!(a.0.store.snapshot(), b.0.store.snapshot());
}

#[test]
fn grid_is_exhaustive_and_reproducible() {
    let s = splits(0.2, Setup::Tl);
    let cfg = TrainConfig {
        max_epochs: 3,
        ..TrainConfig::default()
    };
    let base = small(Setup::Tl, s.vocab);
    let a = grid_search(s.data(), &base, &cfg, &default_grid()).unwrap();
    let b = grid_search(s.data(), &base, &cfg, &default_grid()).unwrap();
    assert_eq!(a.cells.len(), 12);
    assert_eq!(a, b);
    let best = a.best_cell().run.best_val_f();
    assert!(a.cells.iter().all(|c| c.run.best_val_f() <= best));
}

#[test]
fn seed_spread_is_small_on_a_separable_set() {
    let s = splits_of(300, 0.3, Setup::News);
    let cfg = TrainConfig {
        max_epochs: 20,
        ..TrainConfig::default()
    };
    let r = multi_seed_eval(s.data(), &small(Setup::News, s.vocab), &cfg, 5, 0).unwrap();
    assert_eq!(r.runs.iter().map(|r| r.seed).collect::<Vec<_>>(), [0, 1, 2, 3, 4]);
    assert!((0.0..=0.05).contains(&r.std_f), "std {}", r.std_f);

    let one = multi_seed_eval(s.data(), &small(Setup::News, s.vocab), &cfg, 1, 7).unwrap();
    assert_eq!(one.std_f, 0.0);
}
