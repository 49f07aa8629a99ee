// Runs every acceptance criterion and prints one PASS/FAIL line for each.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "test_support.hpp"
#include "upm/cli.hpp"
#include "upm/config.hpp"
#include "upm/ctc.hpp"
#include "upm/data.hpp"
#include "upm/evaluation.hpp"
#include "upm/experiment.hpp"
#include "upm/synthetic.hpp"
#include "upm/training.hpp"
#include "upm/xsampa.hpp"

using namespace upm;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* format, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

const BasePhonemeTable& table() {
  static const BasePhonemeTable t = load_default_table();
  return t;
}

// ---- 1: CTC against the exhaustive sum ---------------------------------------

Verdict ctc_oracle() {
  Verdict v;
  double worst = 0;
  std::size_t instances = 0;
  std::mt19937_64 rng(101);
  auto check = [&](const MatrixXd& logits, const LabelSeq& labels) {
    const double diff = std::abs(ctc_loss(logits, labels).loss - brute_force_ctc(logits, labels));
    worst = std::max(worst, diff);
    ++instances;
  };

  // Every label sequence (including the empty one) that fits, for every
  // frame count up to 5 and inventory size up to 2.
  for (std::size_t z = 1; z <= 2; ++z) {
    for (Eigen::Index frames = 1; frames <= 5; ++frames) {
      std::vector<LabelSeq> frontier{{}};
      for (std::size_t len = 0; len <= static_cast<std::size_t>(frames); ++len) {
        std::vector<LabelSeq> next;
        for (const auto& labels : frontier) {
          if (ctc_min_frames(labels) > static_cast<std::size_t>(frames)) continue;
          check(testkit::random_matrix(frames, static_cast<Eigen::Index>(z + 1), rng, 2.0), labels);
          for (std::size_t k = 0; k < z; ++k) {
            auto longer = labels;
            longer.push_back(k);
            next.push_back(std::move(longer));
          }
        }
        frontier = std::move(next);
      }
    }
  }
  for (int i = 0; i < 200; ++i) {
    const auto frames = static_cast<Eigen::Index>(1 + rng() % 7);
    const std::size_t z = 1 + rng() % 3;
    LabelSeq labels;
    const std::size_t len = rng() % (static_cast<std::size_t>(frames) + 1);
    for (std::size_t k = 0; k < len; ++k) labels.push_back(rng() % z);
    while (ctc_min_frames(labels) > static_cast<std::size_t>(frames)) labels.pop_back();
    check(testkit::random_matrix(frames, static_cast<Eigen::Index>(z + 1), rng, 2.0), labels);
  }
  v.require(worst < 1e-10, fmt("max |diff| %.3g", worst));
  v.detail = fmt("%.0f instances, max |diff| = %.3g", static_cast<double>(instances), worst) +
             (v.pass ? "" : " (" + v.detail + ")");
  return v;
}

// ---- 2: full-model gradient check --------------------------------------------

Verdict gradient_check() {
  Verdict v;
  const auto base = testkit::tiny_upm(11);
  std::mt19937_64 rng(12);
  Utterance u{"g-0", "toy", testkit::random_matrix(4, 3, rng).cast<float>(),
              testkit::phonemes({"p", "a:"})};
  const Batch batch{&u};
  TrainConfig cfg;
  cfg.reg_lambda = 0.1;
  const auto n = static_cast<Eigen::Index>(base.encoder().parameter_count());
  auto pack = [&](const Encoder& e, const MatrixXd& proj) {
    VectorXd out(n + proj.size());
    out << e.flatten(), proj.reshaped<Eigen::RowMajor>();
    return out;
  };
  const auto obj = objective_and_grads(base, batch, cfg);
  auto f = [&](const VectorXd& theta) {
    auto m = base;
    m.encoder().assign(theta.head(n));
    m.projection().reshaped<Eigen::RowMajor>() = theta.tail(theta.size() - n);
    return objective_and_grads(m, batch, cfg).loss;
  };
  const double err = grad_check<double>(f, pack(base.encoder(), base.projection()),
                                        pack(obj.grads.encoder, obj.grads.projection), 1e-5);
  v.require(err < 1e-5, "relative error too large");
  v.require(base.catalog().size() == 4 && base.signature("toy").phoneme_count() == 2,
            "tiny model has the wrong shape");
  v.detail = fmt("max relative error = %.3g over %.0f parameters", err,
                 static_cast<double>(n + base.projection().size())) +
             (v.pass ? "" : " (" + v.detail + ")");
  return v;
}

// ---- 3: attribute assignment ---------------------------------------------------

Verdict assignment_fidelity() {
  Verdict v;
  const auto& t = table();
  auto names = [&](const char* p) { return join_attribute_names(assign_attributes(Phoneme(p), t).attributes, t.catalog()); };
  v.require(names("a") == "vowel,open,front,unrounded", "a -> " + names("a"));
  auto ts = assign_attributes(Phoneme("ts"), t).attributes;
  ts.insert(t.catalog().index_of("ejective"));
  v.require(assign_attributes(Phoneme("ts_>"), t).attributes == ts, "ts_> is not attrs(ts) + ejective");

  std::vector<std::string> bases, diacritics;
  for (const auto& [key, entry] : t.entries()) {
    (entry.kind == EntryKind::kBase ? bases : diacritics).push_back(key);
  }
  std::mt19937_64 rng(33);
  std::size_t violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::string s = bases[rng() % bases.size()];
    for (int k = static_cast<int>(rng() % 3); k > 0; --k) s += diacritics[rng() % diacritics.size()];
    const auto parts = assign_attributes(Phoneme(s), t).matched_parts;
    std::string remaining = s;
    for (std::size_t i = parts.size(); i-- > 1;) {
      // No suffix longer than the one stripped may be in the table.
      for (std::size_t len = parts[i].text.size() + 1; len <= remaining.size(); ++len) {
        violations += t.contains(remaining.substr(remaining.size() - len));
      }
      remaining.resize(remaining.size() - parts[i].text.size());
    }
    violations += remaining != parts.front().text;
  }
  v.require(violations == 0, std::to_string(violations) + " maximality violations");
  v.detail = "a, ts_> and 100 random strings" + (v.pass ? "" : " (" + v.detail + ")");
  return v;
}

// ---- 4, 5: zero-shot experiment ------------------------------------------------

struct ZeroShotRuns {
  std::vector<ZeroShotResult> results;
};

ZeroShotRuns run_zero_shot_seeds() {
  ZeroShotRuns runs;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ExperimentConfig config;
    config.synth.seed = seed;
    config.train.seed = seed;
    const auto data = generate_synthetic(config.synth, table());
    runs.results.push_back(run_zero_shot(data, table(), config));
    const auto& r = runs.results.back();
    std::printf("  seed %llu: upm per %.2f unseen %.2f | baseline per %.2f unseen %.2f\n",
                static_cast<unsigned long long>(seed), r.upm.report.per, r.upm.split.unseen_per.value_or(-1),
                r.baseline.report.per, r.baseline.split.unseen_per.value_or(-1));
    std::fflush(stdout);
  }
  return runs;
}

Verdict baseline_unseen(const ZeroShotRuns& runs) {
  Verdict v;
  for (const auto& r : runs.results) {
    v.require(r.baseline.split.unseen_per.has_value() && *r.baseline.split.unseen_per == 100.0,
              "baseline unseen_per " + fmt("%.6f", r.baseline.split.unseen_per.value_or(-1)));
    v.require(!r.baseline.split.unseen.empty(), "test set has no unseen phonemes");
  }
  v.detail = "baseline unseen_per == 100.0 on " + std::to_string(runs.results.size()) + " test sets" +
             (v.pass ? "" : " (" + v.detail + ")");
  return v;
}

Verdict zero_shot(const ZeroShotRuns& runs) {
  Verdict v;
  double upm = 0, base = 0, unseen = 0;
  for (const auto& r : runs.results) {
    upm += r.upm.report.per;
    base += r.baseline.report.per;
    unseen += r.upm.split.unseen_per.value_or(100.0);
  }
  const double n = static_cast<double>(runs.results.size());
  upm /= n, base /= n, unseen /= n;
  v.require(upm < base, "UPM mean PER not below baseline");
  v.require(unseen < 100.0, "UPM mean unseen_per not below 100");
  v.detail = fmt("mean PER upm %.2f vs baseline %.2f; upm unseen_per %.2f", upm, base, unseen);
  return v;
}

// ---- 6: language-count sweep -----------------------------------------------------

Verdict sweep() {
  Verdict v;
  ExperimentConfig config;
  config.train.max_steps = 6000;
  config.train.log_every = 6000;
  const auto runs = run_sweep(config, table(), {2, 4, 6}, {1, 2, 3}, [](const SweepRun& r) {
    std::printf("  %s n=%zu seed=%llu per %.2f\n", r.mode.c_str(), r.languages,
                static_cast<unsigned long long>(r.seed), r.per);
    std::fflush(stdout);
  });
  std::map<std::string, std::map<std::size_t, double>> mean;
  for (const auto& row : summarize_sweep(runs)) mean[row.mode][row.languages] = row.mean_per;
  for (const auto& [mode, by_count] : mean) {
    double previous = 1e300;
    for (const auto& [count, per] : by_count) {
      v.require(per <= previous, mode + " rises at " + std::to_string(count));
      previous = per;
    }
  }
  for (std::size_t count : {2, 4, 6}) {
    v.require(mean["upm"][count] <= mean["baseline"][count], "upm above baseline at " + std::to_string(count));
  }
  std::string table_text;
  for (const auto& mode : {"baseline", "upm"}) {
    table_text += std::string(mode) + fmt(" %.2f/%.2f/%.2f  ", mean[mode][2], mean[mode][4], mean[mode][6]);
  }
  v.detail = "mean PER at 2/4/6: " + table_text + (v.pass ? "" : "(" + v.detail + ")");
  return v;
}

// ---- 7: evaluation oracle --------------------------------------------------------

Verdict evaluation_oracle() {
  Verdict v;
  std::mt19937_64 rng(77);
  auto random_seq = [&] {
    Sequence s(rng() % 13);
    for (auto& x : s) x = std::string(1, static_cast<char>('a' + rng() % 5));
    return s;
  };
  std::size_t mismatches = 0;
  double worst = 0;
  std::vector<ScoredPair> pool;
  for (int i = 0; i < 1000; ++i) {
    auto ref = random_seq(), hyp = random_seq();
    mismatches += align(ref, hyp).distance() != testkit::ref_edit_distance(ref, hyp);
    if (ref.empty()) continue;
    pool.emplace_back(std::move(ref), std::move(hyp));
    const auto r = error_report({pool.back()});
    worst = std::max(worst, std::abs(r.per - (r.substitution_rate + r.deletion_rate + r.insertion_rate)));
  }
  const auto pooled = error_report(pool);
  worst = std::max(worst, std::abs(pooled.per - (pooled.substitution_rate + pooled.deletion_rate +
                                                 pooled.insertion_rate)));
  v.require(mismatches == 0, std::to_string(mismatches) + " distance mismatches");
  v.require(worst <= 1e-9, fmt("decomposition gap %.3g", worst));
  v.detail = fmt("1000 pairs, %.0f mismatches, max decomposition gap %.3g", static_cast<double>(mismatches), worst);
  return v;
}

// ---- 8, 9: determinism and round-trips --------------------------------------------

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

Verdict determinism() {
  Verdict v;
  testkit::TempDir dir;
  testkit::write_text(dir / "spec.cfg",
                      "utterances_per_language = 20\ntest_utterances = 10\nseed = 9\n");
  const auto p = [&](const std::string& s) { return (dir / s).string(); };
  v.require(cli({"synth", "--spec", p("spec.cfg"), "--out", p("a")}) == 0, "synth a failed");
  v.require(cli({"synth", "--spec", p("spec.cfg"), "--out", p("b")}) == 0, "synth b failed");
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), dir / "a");
    v.require(testkit::read_bytes(entry.path()) == testkit::read_bytes(dir / "b" / rel),
              "synth differs at " + rel.string());
    ++files;
  }
  for (const char* mode : {"upm", "baseline"}) {
    for (const char* out : {"1.ckpt", "2.ckpt"}) {
      v.require(cli({"train", "--data", p("a/train.tsv"), "--mode", mode, "--steps", "30",
                     "--log-every", "30", "--seed", "4", "--out", p(std::string(mode) + out)}) == 0,
                std::string("train ") + mode + " failed");
    }
    v.require(testkit::read_bytes(dir / (std::string(mode) + "1.ckpt")) ==
                  testkit::read_bytes(dir / (std::string(mode) + "2.ckpt")),
              std::string(mode) + " checkpoints differ");
  }
  v.detail = std::to_string(files) + " synth files and 2x2 checkpoints compared" +
             (v.pass ? "" : " (" + v.detail + ")");
  return v;
}

Verdict round_trips() {
  Verdict v;
  testkit::TempDir dir;
  std::mt19937_64 rng(5);
  const FeatureMatrix features = testkit::random_matrix(9, 7, rng).cast<float>();
  write_feature_file(dir / "f.zphf", features);
  const auto back = read_feature_file(dir / "f.zphf");
  v.require(back.rows() == features.rows() && back.cols() == features.cols() &&
                std::memcmp(back.data(), features.data(), sizeof(float) * 63) == 0,
            "feature matrix changed");

  auto upm_model = testkit::tiny_upm(6);
  upm_model = retarget(upm_model, testkit::phonemes({"a", "p:"}), "other");
  const AnyModel models[] = {
      upm_model,
      BaselineModel::initialize({3, 2, 2}, testkit::tiny_table(),
                                make_inventory("shared", testkit::phonemes({"p", "a:"}), testkit::tiny_table()), 7)};
  for (const auto& model : models) {
    save_checkpoint(model, dir / "m.ckpt");
    const auto bytes = testkit::read_bytes(dir / "m.ckpt");
    const auto loaded = load_checkpoint(dir / "m.ckpt");
    v.require(loaded == model, "checkpoint model changed");
    save_checkpoint(loaded, dir / "m2.ckpt");
    v.require(testkit::read_bytes(dir / "m2.ckpt") == bytes, "checkpoint bytes changed");
  }
  v.detail = "features, UPM and baseline checkpoints" + (v.pass ? "" : " (" + v.detail + ")");
  return v;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int number, const char* name, const std::function<Verdict()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = body();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !v.pass;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", number, name,
                v.detail.c_str(), seconds);
    std::fflush(stdout);
  };

  report(1, "ctc oracle", ctc_oracle);
  report(2, "gradient check", gradient_check);
  report(3, "attribute assignment", assignment_fidelity);

  ZeroShotRuns zero;
  const auto start = std::chrono::steady_clock::now();
  try {
    zero = run_zero_shot_seeds();
  } catch (const std::exception& e) {
    std::printf("  zero-shot runs failed: %s\n", e.what());
  }
  std::printf("  zero-shot training: %.1f s\n",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  auto need_runs = [&](Verdict (*check)(const ZeroShotRuns&)) {
    return [&zero, check] {
      if (zero.results.size() != 5) return Verdict{false, "zero-shot runs did not complete"};
      return check(zero);
    };
  };
  report(4, "baseline unseen per", need_runs(baseline_unseen));
  report(5, "synthetic zero-shot", need_runs(zero_shot));
  report(6, "language-count sweep", sweep);
  report(7, "evaluation oracle", evaluation_oracle);
  report(8, "determinism", determinism);
  report(9, "round-trips", round_trips);

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
