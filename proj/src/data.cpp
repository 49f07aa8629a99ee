#include "upm/data.hpp"

#include <fstream>
#include <iterator>
#include <map>
#include <set>

#include "binary_io.hpp"
#include "text_util.hpp"
#include "upm/ctc.hpp"

namespace upm {

namespace {
constexpr std::string_view kFeatureMagic = "ZPHF";
}

void write_feature_file(const std::filesystem::path& path, const FeatureMatrix& features) {
  detail::ByteWriter w;
  w.put_bytes(kFeatureMagic);
  w.put<std::uint32_t>(kFeatureVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(features.rows()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(features.cols()));
  for (float v : features.reshaped<Eigen::RowMajor>()) w.put<float>(v);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write feature file " + path.string());
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw IoError("failed writing feature file " + path.string());
}

FeatureMatrix read_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = "feature file " + path.string();
  if (bytes.size() < 16 || std::string_view(bytes).substr(0, 4) != kFeatureMagic) {
    throw BadFeatureHeader(where + ": bad magic or short header");
  }
  detail::ByteReader r(std::string_view(bytes).substr(4), where);
  const auto version = r.get<std::uint32_t>();
  const auto frames = r.get<std::uint32_t>();
  const auto dim = r.get<std::uint32_t>();
  if (version != kFeatureVersion) throw BadFeatureHeader(where + ": unsupported version");
  if (frames == 0 || dim == 0) throw BadFeatureHeader(where + ": T and d_in must be positive");
  if (r.remaining() != std::size_t{frames} * dim * sizeof(float)) {
    throw BadFeatureHeader(where + ": payload size does not match the header");
  }
  FeatureMatrix m(frames, dim);
  for (auto& v : m.reshaped<Eigen::RowMajor>()) v = r.get<float>();
  return m;
}

std::vector<Corpus> load_dataset(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open manifest " + manifest.string());
  const auto dir = manifest.parent_path();

  std::vector<Corpus> corpora;
  std::map<LanguageId, std::size_t> index;
  std::map<LanguageId, std::set<Phoneme>> allowed;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_cr(line);
    if (detail::is_comment_or_blank(line)) continue;
    const std::string where = manifest.string() + ":" + std::to_string(lineno);
    const auto fields = detail::split(line, '\t');
    if (fields.size() != 4) {
      throw ParseError(where + ": expected utt_id<TAB>language<TAB>features<TAB>transcript");
    }
    Utterance utt;
    utt.id = std::string(detail::trim(fields[0]));
    utt.language = std::string(detail::trim(fields[1]));
    if (utt.id.empty() || utt.language.empty()) throw ParseError(where + ": empty id or language");

    auto [it, inserted] = index.try_emplace(utt.language, corpora.size());
    if (inserted) {
      Corpus corpus;
      corpus.language = utt.language;
      corpus.inventory = read_inventory_file(dir / (utt.language + ".inv"));
      allowed[utt.language] = {corpus.inventory.begin(), corpus.inventory.end()};
      corpora.push_back(std::move(corpus));
    }

    std::filesystem::path feats = std::string(detail::trim(fields[2]));
    if (feats.is_relative()) feats = dir / feats;
    utt.features = read_feature_file(feats);

    for (const auto& token : detail::tokenize(fields[3])) {
      Phoneme p(token);
      if (!allowed[utt.language].count(p)) {
        throw TranscriptPhonemeOutsideInventory(where + ": phoneme '" + token +
                                                "' is not in the inventory of " + utt.language);
      }
      utt.transcript.push_back(std::move(p));
    }
    corpora[it->second].utterances.push_back(std::move(utt));
  }
  return corpora;
}

std::filesystem::path write_dataset(const std::filesystem::path& dir,
                                    const std::vector<Corpus>& corpora,
                                    const std::string& manifest_name) {
  std::filesystem::create_directories(dir / "feats");
  const auto manifest = dir / manifest_name;
  std::ofstream out(manifest, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + manifest.string());
  for (const auto& corpus : corpora) {
    write_inventory_file(dir / (corpus.language + ".inv"), corpus.inventory);
    for (const auto& utt : corpus.utterances) {
      const std::string rel = "feats/" + utt.id + ".zphf";
      write_feature_file(dir / rel, utt.features);
      out << utt.id << '\t' << utt.language << '\t' << rel << '\t';
      for (std::size_t i = 0; i < utt.transcript.size(); ++i) {
        if (i) out << ' ';
        out << utt.transcript[i].xsampa();
      }
      out << '\n';
    }
  }
  if (!out) throw IoError("failed writing manifest " + manifest.string());
  return manifest;
}

LabelSeq encode_transcript(const std::vector<Phoneme>& transcript, const SignatureMatrix& sig) {
  LabelSeq labels;
  labels.reserve(transcript.size());
  for (const auto& p : transcript) {
    const auto row = sig.row_of(p.xsampa());
    if (row < 0) {
      throw TranscriptPhonemeOutsideInventory("phoneme '" + p.xsampa() +
                                              "' is not in the model inventory");
    }
    labels.push_back(static_cast<std::size_t>(row));
  }
  return labels;
}

std::vector<std::string> phoneme_strings(const std::vector<Phoneme>& phonemes) {
  std::vector<std::string> out;
  out.reserve(phonemes.size());
  for (const auto& p : phonemes) out.push_back(p.xsampa());
  return out;
}

}  // namespace upm
