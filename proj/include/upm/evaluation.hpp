#pragma once

// Edit-distance scoring: phoneme error rate, its substitution / deletion /
// insertion decomposition, and per-phoneme correction rates split by whether
// a phoneme occurs in the training inventories.

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace upm {

using Sequence = std::vector<std::string>;
using ScoredPair = std::pair<Sequence, Sequence>;  // (reference, hypothesis)

enum class EditKind { kMatch, kSubstitute, kDelete, kInsert };

struct EditOp {
  EditKind kind;
  std::optional<std::string> ref;
  std::optional<std::string> hyp;

  bool operator==(const EditOp&) const = default;
};

struct Alignment {
  std::vector<EditOp> ops;

  std::size_t count(EditKind kind) const;
  /// Substitutions + deletions + insertions.
  std::size_t distance() const;
};

/// Minimum unit-cost alignment. Backtracing from the end prefers match, then
/// substitute, then delete, then insert whenever several moves are optimal.
Alignment align(const Sequence& ref, const Sequence& hyp);

struct ErrorReport {
  std::size_t utterances = 0;
  std::size_t ref_len = 0;
  std::size_t matches = 0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  // Percentages of ref_len.
  double per = 0;
  double substitution_rate = 0;
  double deletion_rate = 0;
  double insertion_rate = 0;
};

/// Pooled over all pairs. Throws EmptyReference when every reference is empty.
ErrorReport error_report(const std::vector<ScoredPair>& pairs);

struct PhonemeScore {
  std::string phoneme;
  bool seen = false;
  std::size_t occurrences = 0;
  std::size_t matches = 0;
  /// Both empty when the phoneme never occurs in the references.
  std::optional<double> correction_rate;
  std::optional<double> error_rate;
};

struct SeenUnseenReport {
  std::vector<PhonemeScore> phonemes;  // test inventory order
  std::vector<std::string> seen;
  std::vector<std::string> unseen;
  std::size_t seen_occurrences = 0;
  std::size_t unseen_occurrences = 0;
  /// Occurrence-weighted mean error; empty when the partition never occurs.
  std::optional<double> seen_per;
  std::optional<double> unseen_per;
  std::optional<double> overall_per;
};

SeenUnseenReport seen_unseen_split(const std::vector<ScoredPair>& pairs,
                                   const std::vector<std::string>& test_inventory,
                                   const std::set<std::string>& train_union);

struct ModelComparison {
  std::string language;
  ErrorReport baseline;
  ErrorReport upm;
  // baseline minus UPM, in absolute percentage points.
  double per_delta = 0;
  double substitution_delta = 0;
  double deletion_delta = 0;
  double insertion_delta = 0;
};

/// Throws MismatchedTestSet when the reports cover different references.
ModelComparison compare_models(const std::string& language, const ErrorReport& upm,
                               const ErrorReport& baseline);

/// `metric<TAB>value` rows.
void write_report_tsv(std::ostream& out, const ErrorReport& report);
void write_seen_unseen_tsv(std::ostream& out, const SeenUnseenReport& report);
/// Header then one row per comparison: language, baseline_per, upm_per,
/// baseline_sub, upm_sub.
void write_comparison_tsv(std::ostream& out, const std::vector<ModelComparison>& rows);

}  // namespace upm
