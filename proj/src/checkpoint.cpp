// Checkpoint layout: "ZPHM", u32 version, then u64-length-prefixed sections:
// catalog TSV, base table TSV, config, encoder parameters, projection (UPM)
// or output layer (baseline), signatures. Doubles are IEEE-754 little-endian.

#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "binary_io.hpp"
#include "upm/model.hpp"

namespace upm {

namespace {

constexpr std::string_view kMagic = "ZPHM";
enum class ModelKind : std::uint8_t { kUpm = 0, kBaseline = 1 };

std::string pack_matrix(const MatrixXd& m) {
  detail::ByteWriter w;
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.rows()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.cols()));
  for (double v : m.reshaped<Eigen::RowMajor>()) w.put<double>(v);
  return w.take();
}

MatrixXd unpack_matrix(std::string_view payload) {
  detail::ByteReader r(payload);
  const auto rows = r.get<std::uint32_t>();
  const auto cols = r.get<std::uint32_t>();
  if (r.remaining() != std::size_t{rows} * cols * sizeof(double)) {
    throw FormatVersionMismatch("checkpoint matrix section has the wrong size");
  }
  MatrixXd m(rows, cols);
  for (auto& v : m.reshaped<Eigen::RowMajor>()) v = r.get<double>();
  return m;
}

std::string pack_encoder(const Encoder& encoder) {
  detail::ByteWriter w;
  const VectorXd flat = encoder.flatten();
  w.put<std::uint64_t>(static_cast<std::uint64_t>(flat.size()));
  for (double v : flat) w.put<double>(v);
  return w.take();
}

Encoder unpack_encoder(std::string_view payload, const EncoderConfig& config) {
  detail::ByteReader r(payload);
  Encoder encoder = Encoder::zeros(config);
  const auto n = r.get<std::uint64_t>();
  if (n != encoder.parameter_count() || r.remaining() != n * sizeof(double)) {
    throw FormatVersionMismatch("checkpoint encoder section does not match its config");
  }
  VectorXd flat(static_cast<Eigen::Index>(n));
  for (auto& v : flat) v = r.get<double>();
  encoder.assign(flat);
  return encoder;
}

void pack_signature(detail::ByteWriter& w, const LanguageId& language, const SignatureMatrix& sig) {
  w.put_string(language);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(sig.phoneme_count()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(sig.attribute_count()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(sig.blank_attribute()));
  const auto& bits = sig.bits();
  w.put_bytes(std::string_view(reinterpret_cast<const char*>(bits.data()),
                               static_cast<std::size_t>(bits.size())));
  for (const auto& label : sig.phoneme_labels()) w.put_string(label);
}

std::pair<LanguageId, SignatureMatrix> unpack_signature(detail::ByteReader& r) {
  LanguageId language = r.get_string();
  const auto z = r.get<std::uint32_t>();
  const auto a = r.get<std::uint32_t>();
  const auto blank = r.get<std::uint32_t>();
  BitMatrix bits(static_cast<Eigen::Index>(z) + 1, static_cast<Eigen::Index>(a));
  const auto raw = r.get_bytes(static_cast<std::size_t>(bits.size()));
  std::memcpy(bits.data(), raw.data(), raw.size());
  std::vector<std::string> labels(z);
  for (auto& label : labels) label = r.get_string();
  return {std::move(language), SignatureMatrix(std::move(bits), std::move(labels), blank)};
}

std::string pack(ModelKind kind, const BasePhonemeTable& table, const Encoder& encoder,
                 const MatrixXd& head, const std::map<LanguageId, const SignatureMatrix*>& sigs) {
  detail::ByteWriter w;
  w.put_bytes(kMagic);
  w.put<std::uint32_t>(kCheckpointVersion);

  std::ostringstream catalog_text, table_text;
  write_catalog(catalog_text, table.catalog());
  write_base_table(table_text, table);
  w.put_section(catalog_text.str());
  w.put_section(table_text.str());

  detail::ByteWriter config;
  const auto& cfg = encoder.config();
  config.put<std::uint8_t>(static_cast<std::uint8_t>(kind));
  config.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.input_dim));
  config.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.layers));
  config.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.cells));
  w.put_section(config.bytes());

  w.put_section(pack_encoder(encoder));
  w.put_section(pack_matrix(head));

  detail::ByteWriter signatures;
  signatures.put<std::uint32_t>(static_cast<std::uint32_t>(sigs.size()));
  for (const auto& [language, sig] : sigs) pack_signature(signatures, language, *sig);
  w.put_section(signatures.bytes());
  return w.take();
}

}  // namespace

std::string serialize_checkpoint(const AnyModel& model) {
  if (const auto* upm = std::get_if<UpmModel>(&model)) {
    std::map<LanguageId, const SignatureMatrix*> sigs;
    for (const auto& [language, sig] : upm->signatures()) sigs.emplace(language, &sig);
    return pack(ModelKind::kUpm, upm->table(), upm->encoder(), upm->projection(), sigs);
  }
  const auto& base = std::get<BaselineModel>(model);
  return pack(ModelKind::kBaseline, base.table(), base.encoder(), base.output(),
              {{"shared", &base.shared_inventory()}});
}

AnyModel deserialize_checkpoint(const std::string& bytes) {
  detail::ByteReader r(bytes);
  if (bytes.size() < kMagic.size() || r.get_bytes(kMagic.size()) != kMagic) {
    throw FormatVersionMismatch("not a checkpoint (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatVersionMismatch("checkpoint version " + std::to_string(version) +
                                " is not supported");
  }
  try {
    std::istringstream catalog_text{std::string(r.get_section())};
    const AttributeCatalog catalog = parse_catalog(catalog_text, "checkpoint catalog");
    std::istringstream table_text{std::string(r.get_section())};
    BasePhonemeTable table = parse_base_table(table_text, catalog, "checkpoint table");

    detail::ByteReader config(r.get_section());
    const auto kind = static_cast<ModelKind>(config.get<std::uint8_t>());
    EncoderConfig cfg;
    cfg.input_dim = config.get<std::uint32_t>();
    cfg.layers = config.get<std::uint32_t>();
    cfg.cells = config.get<std::uint32_t>();
    if (!config.done() || cfg.input_dim == 0 || cfg.layers == 0 || cfg.cells == 0) {
      throw FormatVersionMismatch("checkpoint config section is malformed");
    }
    Encoder encoder = unpack_encoder(r.get_section(), cfg);
    MatrixXd head = unpack_matrix(r.get_section());

    detail::ByteReader sig_reader(r.get_section());
    const auto count = sig_reader.get<std::uint32_t>();
    std::vector<std::pair<LanguageId, SignatureMatrix>> sigs;
    for (std::uint32_t i = 0; i < count; ++i) sigs.push_back(unpack_signature(sig_reader));
    if (!sig_reader.done() || !r.done()) throw FormatVersionMismatch("checkpoint has trailing bytes");

    if (kind == ModelKind::kUpm) {
      UpmModel model(std::move(encoder), std::move(head), std::move(table));
      for (auto& [language, sig] : sigs) model.set_signature(language, std::move(sig));
      return model;
    }
    if (kind == ModelKind::kBaseline && sigs.size() == 1) {
      return BaselineModel(std::move(encoder), std::move(head), std::move(table),
                           std::move(sigs.front().second));
    }
    throw FormatVersionMismatch("checkpoint model kind is malformed");
  } catch (const FormatVersionMismatch&) {
    throw;
  } catch (const Error& e) {
    throw FormatVersionMismatch(std::string("checkpoint is corrupt: ") + e.what());
  }
}

void save_checkpoint(const AnyModel& model, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

AnyModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace upm
