#pragma once

// The universal phonemic model: encoder -> attribute logits (V h) -> phoneme
// logits through a language's signature (S V h). Also the shared-inventory
// baseline that replaces S V with one output layer.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "upm/attribute_catalog.hpp"
#include "upm/ctc.hpp"
#include "upm/encoder.hpp"
#include "upm/numerics.hpp"
#include "upm/signature.hpp"

namespace upm {

using Encoder = EncoderParams<double>;

class UpmModel {
 public:
  UpmModel() = default;
  /// `projection` is a x d with a = catalog size and d = encoder hidden width.
  UpmModel(Encoder encoder, MatrixXd projection, BasePhonemeTable table);

  /// Random encoder and projection (uniform, +-1/sqrt(d)) from `seed`.
  static UpmModel initialize(const EncoderConfig& config, BasePhonemeTable table,
                             std::uint64_t seed);

  const Encoder& encoder() const { return encoder_; }
  Encoder& encoder() { return encoder_; }
  const MatrixXd& projection() const { return projection_; }
  MatrixXd& projection() { return projection_; }
  const BasePhonemeTable& table() const { return table_; }
  const AttributeCatalog& catalog() const { return table_.catalog(); }
  const std::map<LanguageId, SignatureMatrix>& signatures() const { return signatures_; }

  /// Throws UnknownLanguage.
  const SignatureMatrix& signature(const LanguageId& language) const;
  bool has_language(const LanguageId& language) const { return signatures_.count(language) > 0; }
  /// Registers (or replaces) a language's signature; throws ShapeMismatch if
  /// its width is not the catalog size.
  void set_signature(const LanguageId& language, SignatureMatrix signature);
  void add_inventory(const PhonemeInventory& inventory);

  bool operator==(const UpmModel& o) const {
    return encoder_ == o.encoder_ && projection_ == o.projection_ && table_ == o.table_ &&
           signatures_ == o.signatures_;
  }

 private:
  Encoder encoder_;
  MatrixXd projection_;
  BasePhonemeTable table_;
  std::map<LanguageId, SignatureMatrix> signatures_;
};

/// Intermediate values of one UPM forward pass, kept for backpropagation.
struct UpmForward {
  HiddenSequence<double> hidden;
  MatrixXd attribute_logits;  // T x a
  MatrixXd logits;            // T x (z+1)
};

UpmForward upm_forward(const UpmModel& model, const MatrixXd& features, const LanguageId& language);
MatrixXd upm_logits(const UpmModel& model, const MatrixXd& features, const LanguageId& language);
/// Row-wise softmax of upm_logits.
MatrixXd posterior(const UpmModel& model, const MatrixXd& features, const LanguageId& language);

/// Zero-shot transfer: a copy of `model` with a signature for `inventory`'s
/// language built by attribute assignment. Encoder and projection are copied
/// untouched.
UpmModel retarget(const UpmModel& model, const std::vector<Phoneme>& phonemes,
                  const LanguageId& language);
UpmModel retarget(const UpmModel& model, const PhonemeInventory& inventory);

/// Multilingual baseline: one output layer over the shared training inventory.
class BaselineModel {
 public:
  BaselineModel() = default;
  /// `output` is (z+1) x d; row z is the blank.
  BaselineModel(Encoder encoder, MatrixXd output, BasePhonemeTable table,
                SignatureMatrix shared_inventory);

  static BaselineModel initialize(const EncoderConfig& config, BasePhonemeTable table,
                                  const PhonemeInventory& shared_inventory, std::uint64_t seed);

  const Encoder& encoder() const { return encoder_; }
  Encoder& encoder() { return encoder_; }
  const MatrixXd& output() const { return output_; }
  MatrixXd& output() { return output_; }
  const BasePhonemeTable& table() const { return table_; }
  /// Signature of the shared inventory; used for its labels and blank row.
  const SignatureMatrix& shared_inventory() const { return shared_; }
  std::size_t phoneme_count() const { return shared_.phoneme_count(); }

  bool operator==(const BaselineModel& o) const {
    return encoder_ == o.encoder_ && output_ == o.output_ && table_ == o.table_ &&
           shared_ == o.shared_;
  }

 private:
  Encoder encoder_;
  MatrixXd output_;
  BasePhonemeTable table_;
  SignatureMatrix shared_;
};

struct BaselineForward {
  HiddenSequence<double> hidden;
  MatrixXd logits;  // T x (z+1)
};

BaselineForward baseline_forward(const BaselineModel& model, const MatrixXd& features);
MatrixXd baseline_logits(const BaselineModel& model, const MatrixXd& features);

/// Union of several inventories in first-appearance order.
PhonemeInventory shared_inventory(const std::vector<PhonemeInventory>& inventories,
                                  const BasePhonemeTable& table, LanguageId name = "shared");

/// Phoneme strings for a decoded label sequence.
std::vector<std::string> label_strings(const LabelSeq& labels, const SignatureMatrix& sig);

// ---- checkpoints -----------------------------------------------------------

using AnyModel = std::variant<UpmModel, BaselineModel>;

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const AnyModel& model);
AnyModel deserialize_checkpoint(const std::string& bytes);

/// Throws IoError.
void save_checkpoint(const AnyModel& model, const std::filesystem::path& path);
/// Throws IoError or FormatVersionMismatch; never returns a partial model.
AnyModel load_checkpoint(const std::filesystem::path& path);

}  // namespace upm
