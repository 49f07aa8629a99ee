#include "upm/model.hpp"

#include <random>
#include <set>

namespace upm {

namespace {

MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  MatrixXd m(rows, cols);
  for (auto& v : m.reshaped()) v = dist(rng);
  return m;
}

}  // namespace

UpmModel::UpmModel(Encoder encoder, MatrixXd projection, BasePhonemeTable table)
    : encoder_(std::move(encoder)), projection_(std::move(projection)), table_(std::move(table)) {
  if (static_cast<std::size_t>(projection_.rows()) != table_.catalog().size() ||
      static_cast<std::size_t>(projection_.cols()) != encoder_.config().hidden_dim()) {
    throw ShapeMismatch("projection must be " +
                        ShapeString(static_cast<Eigen::Index>(table_.catalog().size()),
                                    static_cast<Eigen::Index>(encoder_.config().hidden_dim())) +
                        ", got " + ShapeString(projection_.rows(), projection_.cols()));
  }
}

UpmModel UpmModel::initialize(const EncoderConfig& config, BasePhonemeTable table,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto encoder = Encoder::random(config, rng);
  const auto a = static_cast<Eigen::Index>(table.catalog().size());
  const auto d = static_cast<Eigen::Index>(config.hidden_dim());
  auto projection = uniform_matrix(a, d, 1.0 / std::sqrt(static_cast<double>(d)), rng);
  return UpmModel(std::move(encoder), std::move(projection), std::move(table));
}

const SignatureMatrix& UpmModel::signature(const LanguageId& language) const {
  const auto it = signatures_.find(language);
  if (it == signatures_.end()) throw UnknownLanguage("no signature for language '" + language + "'");
  return it->second;
}

void UpmModel::set_signature(const LanguageId& language, SignatureMatrix signature) {
  if (signature.attribute_count() != catalog().size() ||
      signature.blank_attribute() != catalog().blank_index()) {
    throw ShapeMismatch("signature for '" + language + "' does not match the catalog");
  }
  signatures_.insert_or_assign(language, std::move(signature));
}

void UpmModel::add_inventory(const PhonemeInventory& inventory) {
  set_signature(inventory.language, build_signature(inventory, catalog()));
}

UpmForward upm_forward(const UpmModel& model, const MatrixXd& features, const LanguageId& language) {
  const MatrixXd s = model.signature(language).as<double>();
  UpmForward out;
  out.hidden = encoder_forward(model.encoder(), features);
  out.attribute_logits.noalias() = out.hidden.values * model.projection().transpose();
  out.logits.noalias() = out.attribute_logits * s.transpose();
  return out;
}

MatrixXd upm_logits(const UpmModel& model, const MatrixXd& features, const LanguageId& language) {
  return upm_forward(model, features, language).logits;
}

MatrixXd posterior(const UpmModel& model, const MatrixXd& features, const LanguageId& language) {
  return softmax_rows(upm_logits(model, features, language));
}

UpmModel retarget(const UpmModel& model, const PhonemeInventory& inventory) {
  UpmModel out = model;
  out.add_inventory(inventory);
  return out;
}

UpmModel retarget(const UpmModel& model, const std::vector<Phoneme>& phonemes,
                  const LanguageId& language) {
  return retarget(model, make_inventory(language, phonemes, model.table()));
}

BaselineModel::BaselineModel(Encoder encoder, MatrixXd output, BasePhonemeTable table,
                             SignatureMatrix shared_inventory)
    : encoder_(std::move(encoder)),
      output_(std::move(output)),
      table_(std::move(table)),
      shared_(std::move(shared_inventory)) {
  if (static_cast<std::size_t>(output_.rows()) != shared_.phoneme_count() + 1 ||
      static_cast<std::size_t>(output_.cols()) != encoder_.config().hidden_dim()) {
    throw ShapeMismatch("baseline output layer must have one row per shared phoneme plus blank");
  }
}

BaselineModel BaselineModel::initialize(const EncoderConfig& config, BasePhonemeTable table,
                                        const PhonemeInventory& shared_inventory,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto encoder = Encoder::random(config, rng);
  const auto rows = static_cast<Eigen::Index>(shared_inventory.size() + 1);
  const auto d = static_cast<Eigen::Index>(config.hidden_dim());
  auto output = uniform_matrix(rows, d, 1.0 / std::sqrt(static_cast<double>(d)), rng);
  auto sig = build_signature(shared_inventory, table.catalog());
  return BaselineModel(std::move(encoder), std::move(output), std::move(table), std::move(sig));
}

BaselineForward baseline_forward(const BaselineModel& model, const MatrixXd& features) {
  BaselineForward out;
  out.hidden = encoder_forward(model.encoder(), features);
  out.logits.noalias() = out.hidden.values * model.output().transpose();
  return out;
}

MatrixXd baseline_logits(const BaselineModel& model, const MatrixXd& features) {
  return baseline_forward(model, features).logits;
}

PhonemeInventory shared_inventory(const std::vector<PhonemeInventory>& inventories,
                                  const BasePhonemeTable& table, LanguageId name) {
  std::vector<Phoneme> phonemes;
  std::set<Phoneme> seen;
  for (const auto& inv : inventories) {
    for (const auto& p : inv.phonemes) {
      if (seen.insert(p).second) phonemes.push_back(p);
    }
  }
  return make_inventory(std::move(name), std::move(phonemes), table);
}

std::vector<std::string> label_strings(const LabelSeq& labels, const SignatureMatrix& sig) {
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (std::size_t l : labels) out.push_back(sig.phoneme_labels().at(l));
  return out;
}

}  // namespace upm
