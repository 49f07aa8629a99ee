#include "upm/evaluation.hpp"

#include <cstdio>
#include <map>
#include <ostream>

#include "upm/errors.hpp"

namespace upm {

std::size_t Alignment::count(EditKind kind) const {
  std::size_t n = 0;
  for (const auto& op : ops) n += op.kind == kind;
  return n;
}

std::size_t Alignment::distance() const { return ops.size() - count(EditKind::kMatch); }

Alignment align(const Sequence& ref, const Sequence& hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::vector<std::size_t>> cost(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) cost[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) cost[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = cost[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cost[i][j] = std::min({diag, cost[i - 1][j] + 1, cost[i][j - 1] + 1});
    }
  }

  Alignment out;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && cost[i][j] == cost[i - 1][j - 1]) {
      out.ops.push_back({EditKind::kMatch, ref[i - 1], hyp[j - 1]});
      --i, --j;
    } else if (i > 0 && j > 0 && ref[i - 1] != hyp[j - 1] && cost[i][j] == cost[i - 1][j - 1] + 1) {
      out.ops.push_back({EditKind::kSubstitute, ref[i - 1], hyp[j - 1]});
      --i, --j;
    } else if (i > 0 && cost[i][j] == cost[i - 1][j] + 1) {
      out.ops.push_back({EditKind::kDelete, ref[i - 1], std::nullopt});
      --i;
    } else {
      out.ops.push_back({EditKind::kInsert, std::nullopt, hyp[j - 1]});
      --j;
    }
  }
  std::reverse(out.ops.begin(), out.ops.end());
  return out;
}

ErrorReport error_report(const std::vector<ScoredPair>& pairs) {
  ErrorReport r;
  for (const auto& [ref, hyp] : pairs) {
    const Alignment a = align(ref, hyp);
    ++r.utterances;
    r.ref_len += ref.size();
    r.matches += a.count(EditKind::kMatch);
    r.substitutions += a.count(EditKind::kSubstitute);
    r.deletions += a.count(EditKind::kDelete);
    r.insertions += a.count(EditKind::kInsert);
  }
  if (r.ref_len == 0) throw EmptyReference("every reference sequence is empty");
  const double scale = 100.0 / static_cast<double>(r.ref_len);
  r.substitution_rate = scale * static_cast<double>(r.substitutions);
  r.deletion_rate = scale * static_cast<double>(r.deletions);
  r.insertion_rate = scale * static_cast<double>(r.insertions);
  r.per = scale * static_cast<double>(r.substitutions + r.deletions + r.insertions);
  return r;
}

SeenUnseenReport seen_unseen_split(const std::vector<ScoredPair>& pairs,
                                   const std::vector<std::string>& test_inventory,
                                   const std::set<std::string>& train_union) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // occurrences, matches
  for (const auto& [ref, hyp] : pairs) {
    for (const auto& p : ref) ++tally[p].first;
    for (const auto& op : align(ref, hyp).ops) {
      if (op.kind == EditKind::kMatch) ++tally[*op.ref].second;
    }
  }

  SeenUnseenReport out;
  std::size_t seen_matches = 0, unseen_matches = 0;
  auto score = [&](const std::string& p) {
    PhonemeScore s;
    s.phoneme = p;
    s.seen = train_union.count(p) > 0;
    if (auto it = tally.find(p); it != tally.end()) {
      s.occurrences = it->second.first;
      s.matches = it->second.second;
    }
    if (s.occurrences > 0) {
      s.correction_rate = 100.0 * static_cast<double>(s.matches) / static_cast<double>(s.occurrences);
      s.error_rate = 100.0 - *s.correction_rate;
    }
    (s.seen ? out.seen_occurrences : out.unseen_occurrences) += s.occurrences;
    (s.seen ? seen_matches : unseen_matches) += s.matches;
    return s;
  };

  std::set<std::string> listed;
  for (const auto& p : test_inventory) {
    if (!listed.insert(p).second) continue;
    auto s = score(p);
    (s.seen ? out.seen : out.unseen).push_back(p);
    out.phonemes.push_back(std::move(s));
  }
  // Reference phonemes missing from the declared inventory still count.
  for (const auto& [p, counts] : tally) {
    if (!listed.count(p)) out.phonemes.push_back(score(p));
  }

  auto weighted_error = [](std::size_t matches, std::size_t occurrences) -> std::optional<double> {
    if (occurrences == 0) return std::nullopt;
    return 100.0 - 100.0 * static_cast<double>(matches) / static_cast<double>(occurrences);
  };
  out.seen_per = weighted_error(seen_matches, out.seen_occurrences);
  out.unseen_per = weighted_error(unseen_matches, out.unseen_occurrences);
  out.overall_per = weighted_error(seen_matches + unseen_matches,
                                   out.seen_occurrences + out.unseen_occurrences);
  return out;
}

ModelComparison compare_models(const std::string& language, const ErrorReport& upm,
                               const ErrorReport& baseline) {
  if (upm.ref_len != baseline.ref_len || upm.utterances != baseline.utterances) {
    throw MismatchedTestSet("reports cover different reference sets");
  }
  ModelComparison c{language, baseline, upm};
  c.per_delta = baseline.per - upm.per;
  c.substitution_delta = baseline.substitution_rate - upm.substitution_rate;
  c.deletion_delta = baseline.deletion_rate - upm.deletion_rate;
  c.insertion_delta = baseline.insertion_rate - upm.insertion_rate;
  return c;
}

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fixed(const std::optional<double>& v) { return v ? fixed(*v) : "N.A."; }

}  // namespace

void write_report_tsv(std::ostream& out, const ErrorReport& r) {
  out << "utterances\t" << r.utterances << '\n'
      << "ref_len\t" << r.ref_len << '\n'
      << "per\t" << fixed(r.per) << '\n'
      << "substitution_rate\t" << fixed(r.substitution_rate) << '\n'
      << "deletion_rate\t" << fixed(r.deletion_rate) << '\n'
      << "insertion_rate\t" << fixed(r.insertion_rate) << '\n'
      << "substitutions\t" << r.substitutions << '\n'
      << "deletions\t" << r.deletions << '\n'
      << "insertions\t" << r.insertions << '\n';
}

void write_seen_unseen_tsv(std::ostream& out, const SeenUnseenReport& r) {
  out << "seen_per\t" << fixed(r.seen_per) << '\n'
      << "unseen_per\t" << fixed(r.unseen_per) << '\n'
      << "seen_occurrences\t" << r.seen_occurrences << '\n'
      << "unseen_occurrences\t" << r.unseen_occurrences << '\n';
  for (const auto& p : r.phonemes) {
    out << "phoneme_error:" << p.phoneme << '\t' << fixed(p.error_rate) << '\t'
        << (p.seen ? "seen" : "unseen") << '\t' << p.occurrences << '\n';
  }
}

void write_comparison_tsv(std::ostream& out, const std::vector<ModelComparison>& rows) {
  out << "language\tbaseline_per\tupm_per\tbaseline_sub\tupm_sub\n";
  for (const auto& c : rows) {
    out << c.language << '\t' << fixed(c.baseline.per) << '\t' << fixed(c.upm.per) << '\t'
        << fixed(c.baseline.substitution_rate) << '\t' << fixed(c.upm.substitution_rate) << '\n';
  }
}

}  // namespace upm
