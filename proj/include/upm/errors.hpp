#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace upm {

/// Base of every error raised by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define UPM_DEFINE_ERROR(Name)            \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

UPM_DEFINE_ERROR(ParseError);
UPM_DEFINE_ERROR(UnknownAttribute);
UPM_DEFINE_ERROR(DuplicatePhoneme);
UPM_DEFINE_ERROR(EmptyAttributeSet);
UPM_DEFINE_ERROR(ShapeMismatch);
UPM_DEFINE_ERROR(MissingCache);
UPM_DEFINE_ERROR(TooLarge);
UPM_DEFINE_ERROR(UnknownLanguage);
UPM_DEFINE_ERROR(IoError);
UPM_DEFINE_ERROR(FormatVersionMismatch);
UPM_DEFINE_ERROR(EmptyCorpus);
UPM_DEFINE_ERROR(EmptyReference);
UPM_DEFINE_ERROR(MismatchedTestSet);
UPM_DEFINE_ERROR(BadFeatureHeader);
UPM_DEFINE_ERROR(TranscriptPhonemeOutsideInventory);
UPM_DEFINE_ERROR(InfeasibleSpec);
UPM_DEFINE_ERROR(ConfigError);

#undef UPM_DEFINE_ERROR

/// No suffix of `remainder` is in the base table. `index` is set by batch
/// assignment to the position of the failing phoneme.
class UnknownPhoneme : public Error {
 public:
  UnknownPhoneme(std::string phoneme, std::string remainder,
                 std::ptrdiff_t index = -1)
      : Error(Describe(phoneme, remainder, index)),
        phoneme_(std::move(phoneme)),
        remainder_(std::move(remainder)),
        index_(index) {}

  const std::string& phoneme() const { return phoneme_; }
  const std::string& remainder() const { return remainder_; }
  std::ptrdiff_t index() const { return index_; }

 private:
  static std::string Describe(const std::string& phoneme,
                              const std::string& remainder,
                              std::ptrdiff_t index) {
    std::string msg = "unknown phoneme '" + phoneme + "'";
    if (remainder != phoneme) msg += " (unmatched remainder '" + remainder + "')";
    if (index >= 0) msg += " at position " + std::to_string(index);
    return msg;
  }

  std::string phoneme_;
  std::string remainder_;
  std::ptrdiff_t index_;
};

/// The label sequence cannot be emitted in the available number of frames.
class ImpossibleAlignment : public Error {
 public:
  explicit ImpossibleAlignment(const std::string& what, std::string utterance = {})
      : Error(utterance.empty() ? what : utterance + ": " + what),
        utterance_(std::move(utterance)) {}
  const std::string& utterance() const { return utterance_; }

 private:
  std::string utterance_;
};

}  // namespace upm
