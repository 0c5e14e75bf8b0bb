use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use polyglot_ctc::model::load_model;

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    /// Generates two small corpora, `la` and `tgt`, under `corpora/`.
    fn new() -> Self {
        let ws = Workspace {
            dir: tempfile::tempdir().unwrap(),
        };
        ws.write(
            "gen.conf",
            "languages = la, tgt\nla.pool_indices = 0,1,2,3,4\nla.utterances = 20\n\
             tgt.pool_indices = 2,3,5,6\ntgt.utterances = 12\n",
        );
        ws.ok(&["gen-synth", "gen.conf", "--out", "corpora"]);
        ws
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn write(&self, name: &str, text: &str) {
        fs::write(self.path(name), text).unwrap();
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_polyglot-ctc"))
            .current_dir(self.dir.path())
            .args(args)
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    }

    fn fails_with(&self, code: i32, args: &[&str]) -> String {
        let out = self.run(args);
        assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stderr).unwrap()
    }

    fn train_donor(&self) {
        self.write(
            "train.conf",
            "corpus.la = corpora/la\nhidden_dim = 4\nnum_layers = 1\nepochs = 2\nlearning_rate = 1.0\n",
        );
        self.ok(&["train", "train.conf", "--out", "run"]);
    }
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap()
}

#[test]
fn train_decode_eval_flow() {
    let ws = Workspace::new();
    ws.train_donor();
    assert!(read(&ws.path("run/curves.csv")).starts_with("epoch,language,mean_loss,dev_per\n"));

    ws.ok(&["decode", "--model", "run/model.bin", "--corpus", "corpora/la", "--out", "dec", "--beam", "3"]);
    let decoded = read(&ws.path("dec/decode.tsv"));
    assert_eq!(decoded.lines().count(), 21);

    let stdout = ws.ok(&["eval", "--model", "run/model.bin", "--corpus", "corpora/la", "--out", "ev"]);
    assert!(stdout.starts_with("PER "), "{stdout}");
    let eval = read(&ws.path("ev/eval.tsv"));
    assert!(eval.starts_with("utterance_id\treference\thypothesis\tsubstitutions"));
    assert_eq!(eval.lines().count(), 21);
}

#[test]
fn softmax_adaptation_keeps_encoder_bytes() {
    let ws = Workspace::new();
    ws.train_donor();
    ws.write(
        "adapt.conf",
        "donor = run/model.bin\ncorpus.tgt = corpora/tgt\nmode = adapt_softmax\nepochs = 2\nlearning_rate = 1.0\n",
    );
    ws.ok(&["adapt", "adapt.conf", "--out", "adapted"]);
    let donor = load_model(&ws.path("run/model.bin")).unwrap();
    let adapted = load_model(&ws.path("adapted/model.bin")).unwrap();
    assert_eq!(donor.encoder, adapted.encoder);
    assert_eq!(adapted.languages().collect::<Vec<_>>(), ["tgt"]);
}

#[test]
fn sweep_writes_one_row_per_cell() {
    let ws = Workspace::new();
    ws.train_donor();
    ws.write(
        "sweep.conf",
        "donor.a = run/model.bin\ndonor.b = run/model.bin\ntarget = corpora/tgt\n\
         fractions = 0.5, 1.0\nepochs = 1\nlearning_rate = 1.0\nseeds = 1, 2\n",
    );
    ws.ok(&["sweep", "sweep.conf", "--out", "sweep"]);
    let csv = read(&ws.path("sweep/sweep.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("donor,mode,fraction,seed,dev_per,epochs,wall_seconds"));
    // two donors by two fractions, plus one baseline, for each of two seeds
    assert_eq!(lines.count(), 2 * (2 * 2 + 1));
}

#[test]
fn invalid_configurations_exit_with_2() {
    let ws = Workspace::new();

    ws.write("dup.conf", "languages = la, la\nla.pool_indices = 0,1\n");
    ws.fails_with(2, &["gen-synth", "dup.conf", "--out", "x"]);

    ws.write("unknown.conf", "corpus.la = corpora/la\nepochz = 3\n");
    let err = ws.fails_with(2, &["train", "unknown.conf", "--out", "x"]);
    assert!(err.contains("epochz"), "{err}");

    ws.write("nowhere.conf", "corpus.la = corpora/nowhere\n");
    ws.fails_with(2, &["train", "nowhere.conf", "--out", "x"]);

    ws.write("nodonor.conf", "corpus.tgt = corpora/tgt\n");
    ws.fails_with(2, &["adapt", "nodonor.conf", "--out", "x"]);

    ws.train_donor();
    ws.write(
        "unsorted.conf",
        "donor.a = run/model.bin\ntarget = corpora/tgt\nfractions = 1.0, 0.5\n",
    );
    ws.fails_with(2, &["sweep", "unsorted.conf", "--out", "x"]);

    ws.fails_with(
        2,
        &["eval", "--model", "run/model.bin", "--corpus", "corpora/tgt", "--out", "x"],
    );
    ws.fails_with(2, &["train"]);
}

#[test]
fn unreadable_files_exit_with_1() {
    let ws = Workspace::new();
    ws.fails_with(1, &["train", "absent.conf", "--out", "x"]);
    ws.train_donor();
    fs::create_dir(ws.path("hollow")).unwrap();
    ws.fails_with(
        1,
        &["decode", "--model", "run/model.bin", "--corpus", "hollow", "--out", "x"],
    );
    ws.fails_with(
        2,
        &["decode", "--model", "absent.bin", "--corpus", "corpora/la", "--out", "x"],
    );
}

#[test]
fn runaway_training_exits_with_3() {
    let ws = Workspace::new();
    ws.write(
        "hot.conf",
        "corpus.la = corpora/la\nhidden_dim = 4\nnum_layers = 1\nepochs = 3\nlearning_rate = 1e300\n",
    );
    let err = ws.fails_with(3, &["train", "hot.conf", "--out", "x"]);
    assert!(err.contains("diverge"), "{err}");
}
