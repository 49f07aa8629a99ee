#include "upm/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "text_util.hpp"
#include "upm/attribute_catalog.hpp"
#include "upm/config.hpp"
#include "upm/data.hpp"
#include "upm/errors.hpp"
#include "upm/evaluation.hpp"
#include "upm/experiment.hpp"
#include "upm/model.hpp"
#include "upm/signature.hpp"
#include "upm/synthetic.hpp"
#include "upm/xsampa.hpp"

namespace upm::cli {

namespace {

/// Re-raises a library error with the flag and value that led to it.
template <typename Body>
auto about(const std::string& flag, const std::string& value, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(flag + " " + value + ": " + e.what());
  }
}

struct TableFlags {
  std::string catalog;
  std::string table;

  void add_to(CLI::App& app) {
    app.add_option("--catalog", catalog, "Attribute catalog TSV (default: shipped catalog)");
    app.add_option("--table", table, "Base phoneme table TSV (default: shipped table)");
  }

  BasePhonemeTable load() const {
    const auto dir = default_data_dir();
    const std::string catalog_path = catalog.empty() ? (dir / "catalog.tsv").string() : catalog;
    const std::string table_path = table.empty() ? (dir / "base_table.tsv").string() : table;
    const auto cat = about("--catalog", catalog_path, [&] { return load_catalog(catalog_path); });
    return about("--table", table_path, [&] { return load_base_table(table_path, cat); });
  }
};

std::ofstream open_output(const std::string& flag, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError(flag + " " + path + ": cannot open for writing");
  return file;
}

template <typename T>
std::vector<T> parse_list(const std::string& flag, const std::string& text) {
  std::vector<T> out;
  for (const auto& piece : detail::split(text, ',')) {
    const auto token = std::string(detail::trim(piece));
    T value{};
    std::istringstream in(token);
    if (token.empty() || token[0] == '-' || !(in >> value) || !in.eof()) {
      throw ConfigError(flag + ": '" + token + "' is not a non-negative integer");
    }
    out.push_back(value);
  }
  if (out.empty()) throw ConfigError(flag + ": empty list");
  return out;
}

// ---- attrs ------------------------------------------------------------------

struct AttrsCommand {
  std::vector<std::string> phonemes;
  TableFlags tables;

  void setup(CLI::App& app) {
    app.add_option("phonemes", phonemes, "X-SAMPA phonemes")->required();
    tables.add_to(app);
  }

  void run(std::ostream& out) const {
    const auto table = tables.load();
    for (const auto& text : phonemes) {
      const auto assignment = assign_attributes(Phoneme(text), table);
      out << text << '\t' << join_attribute_names(assignment.attributes, table.catalog()) << '\n';
    }
  }
};

// ---- signature --------------------------------------------------------------

struct SignatureCommand {
  std::string inventory;
  std::string out_path;
  std::string language = "inventory";
  TableFlags tables;

  void setup(CLI::App& app) {
    app.add_option("--inventory", inventory, "Inventory file, one X-SAMPA phoneme per line")
        ->required();
    app.add_option("--out", out_path, "Write the matrix here instead of standard output");
    tables.add_to(app);
  }

  void run(std::ostream& out, std::ostream& err) const {
    const auto table = tables.load();
    const auto inv = about("--inventory", inventory, [&] {
      return make_inventory(language, read_inventory_file(inventory), table);
    });
    const auto sig = build_signature(inv, table.catalog());
    for (const auto& [i, j] : warn_collisions(sig)) {
      err << "warning: phonemes '" << sig.phoneme_labels()[i] << "' and '"
          << sig.phoneme_labels()[j] << "' share one attribute set\n";
    }
    if (out_path.empty()) {
      write_signature(out, sig);
    } else {
      auto file = open_output("--out", out_path);
      write_signature(file, sig);
    }
  }
};

// ---- synth ------------------------------------------------------------------

struct SynthCommand {
  std::string spec;
  std::string out_dir;
  TableFlags tables;

  void setup(CLI::App& app) {
    app.add_option("--spec", spec, "Synthetic spec, key = value lines")->required();
    app.add_option("--out", out_dir, "Output directory")->required();
    tables.add_to(app);
  }

  void run(std::ostream& out) const {
    const auto table = tables.load();
    const auto config = about("--spec", spec, [&] { return load_experiment_config(spec); });
    const auto data = generate_synthetic(config.synth, table);
    const std::filesystem::path dir(out_dir);
    const auto train = about("--out", out_dir, [&] { return write_dataset(dir, data.train, "train.tsv"); });
    const auto test = about("--out", out_dir, [&] { return write_dataset(dir, {data.test}, "test.tsv"); });
    write_inventory_file(dir / "train_union.txt",
                         std::vector<Phoneme>(data.train_union.begin(), data.train_union.end()));
    out << "train\t" << train.string() << '\n'
        << "test\t" << test.string() << '\n'
        << "train_union\t" << (dir / "train_union.txt").string() << '\n';
  }
};

// ---- train ------------------------------------------------------------------

struct TrainCommand {
  std::string data;
  std::string mode = "upm";
  std::string config;
  std::string out_path;
  // Flag overrides; unset flags leave the file or default value alone.
  std::optional<double> learning_rate, reg_lambda, grad_clip_norm, validation_fraction;
  std::optional<std::size_t> batch_size, max_steps, log_every, layers, cells;
  std::optional<std::uint64_t> seed;
  TableFlags tables;

  void setup(CLI::App& app) {
    app.add_option("--data", data, "Training manifest")->required();
    app.add_option("--mode", mode, "upm or baseline")
        ->check(CLI::IsMember({"upm", "baseline"}));
    app.add_option("--config", config, "Training config, key = value lines");
    app.add_option("--out", out_path, "Checkpoint path")->required();
    app.add_option("--learning-rate", learning_rate, "SGD step size");
    app.add_option("--reg-lambda", reg_lambda, "Weight of the squared norm of V (UPM only)");
    app.add_option("--batch-size", batch_size, "Utterances per step");
    app.add_option("--steps", max_steps, "Number of SGD steps");
    app.add_option("--grad-clip-norm", grad_clip_norm, "Global gradient norm cap; 0 disables");
    app.add_option("--seed", seed, "Seed for initialization, split and sampling");
    app.add_option("--validation-fraction", validation_fraction, "Held-out share per corpus");
    app.add_option("--log-every", log_every, "Steps between progress lines");
    app.add_option("--layers", layers, "BiLSTM layers");
    app.add_option("--cells", cells, "Cells per direction");
    tables.add_to(app);
  }

  TrainSettings settings() const {
    TrainSettings s;
    if (!config.empty()) s = about("--config", config, [&] { return load_train_settings(config); });
    if (learning_rate) s.train.learning_rate = *learning_rate;
    if (reg_lambda) s.train.reg_lambda = *reg_lambda;
    if (batch_size) s.train.batch_size = *batch_size;
    if (max_steps) s.train.max_steps = *max_steps;
    if (grad_clip_norm) s.train.grad_clip_norm = *grad_clip_norm;
    if (seed) s.train.seed = *seed;
    if (validation_fraction) s.train.validation_fraction = *validation_fraction;
    if (log_every) s.train.log_every = *log_every;
    if (layers) s.encoder.layers = *layers;
    if (cells) s.encoder.cells = *cells;
    if (s.encoder.layers == 0 || s.encoder.cells == 0) {
      throw ConfigError("layers and cells must be positive");
    }
    s.train.validate();
    return s;
  }

  void run(std::ostream& out) const {
    auto s = settings();
    const auto corpora = about("--data", data, [&] { return load_dataset(data); });
    if (corpora.empty()) throw EmptyCorpus("--data " + data + ": manifest lists no utterances");
    s.encoder.input_dim = static_cast<std::size_t>(corpora.front().utterances.front().features.cols());
    for (const auto& c : corpora) {
      for (const auto& u : c.utterances) {
        if (static_cast<std::size_t>(u.features.cols()) != s.encoder.input_dim) {
          throw ShapeMismatch("--data " + data + ": utterance '" + u.id +
                              "' has a different feature width");
        }
      }
    }
    const auto table = tables.load();
    const ProgressSink sink = [&out](const HistoryEntry& e) { out << format_progress(e) << '\n'; };
    AnyModel model;
    if (mode == "upm") {
      model = train_upm(corpora, table, s.encoder, s.train, sink).model;
    } else {
      model = train_shared_baseline(corpora, table, s.encoder, s.train, sink).model;
    }
    about("--out", out_path, [&] { save_checkpoint(model, out_path); return 0; });
  }
};

// ---- transcribe -------------------------------------------------------------

struct TranscribeCommand {
  std::string ckpt;
  std::string data;
  std::string language;
  std::string inventory;

  void setup(CLI::App& app) {
    app.add_option("--ckpt", ckpt, "Checkpoint")->required();
    app.add_option("--data", data, "Manifest with the utterances to decode")->required();
    app.add_option("--lang", language, "Language id to decode")->required();
    app.add_option("--inventory", inventory,
                   "Inventory for a zero-shot signature (UPM checkpoints only)");
  }

  void run(std::ostream& out, std::ostream& err) const {
    const AnyModel model = about("--ckpt", ckpt, [&] { return load_checkpoint(ckpt); });
    const auto corpora = about("--data", data, [&] { return load_dataset(data); });
    std::vector<Utterance> utterances;
    for (const auto& c : corpora) {
      if (c.language == language) utterances = c.utterances;
    }
    if (utterances.empty()) {
      throw UnknownLanguage("--lang " + language + ": no utterances in " + data);
    }

    if (const auto* upm_model = std::get_if<UpmModel>(&model)) {
      if (inventory.empty()) {
        write_transcriptions(out, transcribe(*upm_model, utterances, language));
        return;
      }
      const auto phonemes = about("--inventory", inventory, [&] { return read_inventory_file(inventory); });
      const auto target = about("--inventory", inventory,
                                [&] { return retarget(*upm_model, phonemes, language); });
      write_transcriptions(out, transcribe(target, utterances, language));
    } else {
      if (!inventory.empty()) {
        err << "note: baseline checkpoints decode over their shared inventory; --inventory ignored\n";
      }
      write_transcriptions(out, transcribe(std::get<BaselineModel>(model), utterances));
    }
  }
};

// ---- eval -------------------------------------------------------------------

struct EvalCommand {
  std::string ref;
  std::string hyp;
  std::string train_union;

  void setup(CLI::App& app) {
    app.add_option("--ref", ref, "Reference manifest")->required();
    app.add_option("--hyp", hyp, "Hypotheses, utt_id<TAB>phonemes")->required();
    app.add_option("--train-union", train_union,
                   "Training phonemes, one per line; enables the seen/unseen report");
  }

  void run(std::ostream& out) const {
    const auto corpora = about("--ref", ref, [&] { return load_dataset(ref); });
    std::ifstream hyp_in(hyp);
    if (!hyp_in) throw IoError("--hyp " + hyp + ": cannot open");
    const auto hypotheses = about("--hyp", hyp, [&] { return read_transcriptions(hyp_in, hyp); });

    std::vector<Utterance> references;
    std::vector<std::string> test_inventory;
    for (const auto& c : corpora) {
      references.insert(references.end(), c.utterances.begin(), c.utterances.end());
      for (const auto& p : c.inventory) test_inventory.push_back(p.xsampa());
    }
    const auto pairs = about("--hyp", hyp, [&] { return pair_by_id(references, hypotheses); });
    write_report_tsv(out, error_report(pairs));
    if (!train_union.empty()) {
      std::set<std::string> seen;
      for (const auto& p : about("--train-union", train_union,
                                 [&] { return read_inventory_file(train_union); })) {
        seen.insert(p.xsampa());
      }
      write_seen_unseen_tsv(out, seen_unseen_split(pairs, test_inventory, seen));
    }
  }
};

// ---- sweep ------------------------------------------------------------------

struct SweepCommand {
  std::string spec;
  std::string counts = "2,4,6";
  std::string seeds = "1,2,3";
  std::string runs_path;
  TableFlags tables;

  void setup(CLI::App& app) {
    app.add_option("--spec", spec, "Experiment spec, key = value lines")->required();
    app.add_option("--language-counts", counts, "Comma-separated training language counts");
    app.add_option("--seeds", seeds, "Comma-separated seeds");
    app.add_option("--runs", runs_path, "Write per-seed results here");
    tables.add_to(app);
  }

  void run(std::ostream& out, std::ostream& err) const {
    const auto table = tables.load();
    const auto config = about("--spec", spec, [&] { return load_experiment_config(spec); });
    const auto count_list = parse_list<std::size_t>("--language-counts", counts);
    const auto seed_list = parse_list<std::uint64_t>("--seeds", seeds);
    const auto runs = run_sweep(config, table, count_list, seed_list, [&err](const SweepRun& r) {
      err << "sweep: mode=" << r.mode << " languages=" << r.languages << " seed=" << r.seed
          << " per=" << r.per << '\n';
    });
    if (!runs_path.empty()) {
      auto file = open_output("--runs", runs_path);
      write_sweep_runs_tsv(file, runs);
    }
    write_sweep_tsv(out, summarize_sweep(runs));
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-shot phonemic transcription with articulatory attributes", "upm"};
  app.require_subcommand(1);

  AttrsCommand attrs;
  SignatureCommand signature;
  SynthCommand synth;
  TrainCommand train;
  TranscribeCommand transcribe_cmd;
  EvalCommand eval;
  SweepCommand sweep;
  attrs.setup(*app.add_subcommand("attrs", "Print the attribute set of X-SAMPA phonemes"));
  signature.setup(*app.add_subcommand("signature", "Emit the signature matrix of an inventory"));
  synth.setup(*app.add_subcommand("synth", "Generate a synthetic multilingual dataset"));
  train.setup(*app.add_subcommand("train", "Train a UPM or baseline model"));
  transcribe_cmd.setup(*app.add_subcommand("transcribe", "Greedy-decode a dataset"));
  eval.setup(*app.add_subcommand("eval", "Score hypotheses against references"));
  sweep.setup(*app.add_subcommand("sweep", "Train both models over several language counts"));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "attrs") attrs.run(out);
    else if (name == "signature") signature.run(out, err);
    else if (name == "synth") synth.run(out);
    else if (name == "train") train.run(out);
    else if (name == "transcribe") transcribe_cmd.run(out, err);
    else if (name == "eval") eval.run(out);
    else if (name == "sweep") sweep.run(out, err);
    return 0;
  } catch (const Error& e) {
    err << "upm: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "upm: internal error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace upm::cli
