#include "hallens/lexical_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hallens/error.hpp"
#include "hallens/io.hpp"
#include "json.hpp"

namespace hallens {

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) || (c >= 123 && c <= 126);
}

char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

template <typename Seq>
std::map<Seq, int> ngram_counts(const std::vector<typename Seq::value_type>& items, std::size_t n) {
  std::map<Seq, int> counts;
  if (items.size() < n) return counts;
  for (std::size_t i = 0; i + n <= items.size(); ++i) {
    ++counts[Seq(items.begin() + static_cast<std::ptrdiff_t>(i),
                 items.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

template <typename Map>
long clipped_matches(const Map& hyp, const Map& ref) {
  long matches = 0;
  for (const auto& [gram, count] : hyp) {
    auto it = ref.find(gram);
    if (it != ref.end()) matches += std::min(count, it->second);
  }
  return matches;
}

// Decodes UTF-8 to code points; a byte that does not start a valid sequence
// becomes its own code point so that every input is accepted.
std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    bool ok = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) ok = (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    if (!ok) {
      out.push_back(0x110000u + c);
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? c : len == 2 ? (c & 0x1F) : len == 3 ? (c & 0x0F) : (c & 0x07);
    for (std::size_t k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += len;
  }
  return out;
}

// Lowercase and collapse each whitespace run to one space.
std::vector<char32_t> chrf_chars(std::string_view text) {
  std::string norm;
  norm.reserve(text.size());
  bool in_space = false;
  for (char c : text) {
    if (is_space(static_cast<unsigned char>(c))) {
      if (!in_space) norm.push_back(' ');
      in_space = true;
    } else {
      norm.push_back(ascii_lower(c));
      in_space = false;
    }
  }
  return decode_utf8(norm);
}

}  // namespace

void MetricParams::validate() const {
  if (bleu_max_order < 1) throw UsageError("bleu_max_order must be >= 1");
  if (!(bleu_smoothing_epsilon > 0.0)) throw UsageError("bleu_smoothing_epsilon must be positive");
  if (chrf_max_order < 1) throw UsageError("chrf_max_order must be >= 1");
  if (!(chrf_beta > 0.0)) throw UsageError("chrf_beta must be positive");
  if (!(meteor_alpha > 0.0 && meteor_alpha < 1.0)) throw UsageError("meteor_alpha must lie in (0,1)");
  if (!(meteor_beta > 0.0)) throw UsageError("meteor_beta must be positive");
  if (!(meteor_gamma >= 0.0 && meteor_gamma <= 1.0)) throw UsageError("meteor_gamma must lie in [0,1]");
}

MetricParams parse_metric_params(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("metric params: ") + e.what());
  }
  if (!j.is_object()) throw DataError("metric params: expected an object");
  MetricParams p;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "bleu_max_order") p.bleu_max_order = value.get<int>();
      else if (key == "bleu_smoothing_epsilon") p.bleu_smoothing_epsilon = value.get<double>();
      else if (key == "chrf_max_order") p.chrf_max_order = value.get<int>();
      else if (key == "chrf_beta") p.chrf_beta = value.get<double>();
      else if (key == "meteor_alpha") p.meteor_alpha = value.get<double>();
      else if (key == "meteor_beta") p.meteor_beta = value.get<double>();
      else if (key == "meteor_gamma") p.meteor_gamma = value.get<double>();
      else throw DataError("metric params: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::type_error& e) {
    throw DataError(std::string("metric params: ") + e.what());
  }
  try {
    p.validate();
  } catch (const UsageError& e) {
    throw DataError(std::string("metric params: ") + e.what());
  }
  return p;
}

MetricParams load_metric_params(const std::filesystem::path& path) {
  return parse_metric_params(read_text_file(path));
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::Bleu: return "bleu";
    case Metric::Chrf: return "chrf";
    case Metric::Meteor: return "meteor";
  }
  return "?";
}

std::optional<Metric> parse_metric(std::string_view name) {
  if (name == "bleu") return Metric::Bleu;
  if (name == "chrf") return Metric::Chrf;
  if (name == "meteor") return Metric::Meteor;
  return std::nullopt;
}

TokenSequence tokenize(std::string_view text) {
  TokenSequence tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t begin = i;
    while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t end = i;
    if (begin == end) break;

    std::size_t core_begin = begin;
    while (core_begin < end && is_ascii_punct(static_cast<unsigned char>(text[core_begin]))) ++core_begin;
    std::size_t core_end = end;
    while (core_end > core_begin && is_ascii_punct(static_cast<unsigned char>(text[core_end - 1]))) --core_end;

    for (std::size_t k = begin; k < core_begin; ++k) tokens.emplace_back(1, text[k]);
    if (core_begin < core_end) {
      std::string word(text.substr(core_begin, core_end - core_begin));
      std::transform(word.begin(), word.end(), word.begin(), ascii_lower);
      tokens.push_back(std::move(word));
    }
    for (std::size_t k = core_end; k < end; ++k) tokens.emplace_back(1, text[k]);
  }
  return tokens;
}

double bleu(const TokenSequence& hyp, const TokenSequence& ref, const MetricParams& params) {
  params.validate();
  if (hyp.empty()) return 0.0;
  const std::size_t orders = std::min<std::size_t>(static_cast<std::size_t>(params.bleu_max_order), hyp.size());

  double log_sum = 0.0;
  for (std::size_t n = 1; n <= orders; ++n) {
    const auto hyp_counts = ngram_counts<TokenSequence>(hyp, n);
    const auto ref_counts = ngram_counts<TokenSequence>(ref, n);
    const double candidates = static_cast<double>(hyp.size() - n + 1);
    const long matches = clipped_matches(hyp_counts, ref_counts);
    const double precision = matches > 0 ? static_cast<double>(matches) / candidates
                                         : params.bleu_smoothing_epsilon / candidates;
    log_sum += std::log(precision);
  }
  double score = std::exp(log_sum / static_cast<double>(orders));
  if (hyp.size() < ref.size()) {
    score *= std::exp(1.0 - static_cast<double>(ref.size()) / static_cast<double>(hyp.size()));
  }
  return std::clamp(score, 0.0, 1.0);
}

double chrf(std::string_view hyp, std::string_view ref, const MetricParams& params) {
  params.validate();
  const auto h = chrf_chars(hyp);
  const auto r = chrf_chars(ref);
  if (h.empty() && r.empty()) return 1.0;
  if (h.empty() || r.empty()) return 0.0;

  const double beta2 = params.chrf_beta * params.chrf_beta;
  double f_sum = 0.0;
  int included = 0;
  for (std::size_t n = 1; n <= static_cast<std::size_t>(params.chrf_max_order); ++n) {
    if (h.size() < n && r.size() < n) continue;
    ++included;
    if (h.size() < n || r.size() < n) continue;  // one side has no n-grams: F = 0
    const auto hc = ngram_counts<std::u32string>(h, n);
    const auto rc = ngram_counts<std::u32string>(r, n);
    const double matches = static_cast<double>(clipped_matches(hc, rc));
    const double precision = matches / static_cast<double>(h.size() - n + 1);
    const double recall = matches / static_cast<double>(r.size() - n + 1);
    if (precision + recall > 0.0) {
      f_sum += (1.0 + beta2) * precision * recall / (beta2 * precision + recall);
    }
  }
  return std::clamp(f_sum / included, 0.0, 1.0);
}

double meteor(const TokenSequence& hyp, const TokenSequence& ref, const MetricParams& params) {
  params.validate();
  std::vector<bool> used(ref.size(), false);
  // alignment[i] = matched ref position of hyp token i, or npos.
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<std::size_t> alignment(hyp.size(), npos);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    for (std::size_t j = 0; j < ref.size(); ++j) {
      if (!used[j] && ref[j] == hyp[i]) {
        used[j] = true;
        alignment[i] = j;
        ++matches;
        break;
      }
    }
  }
  if (matches == 0) return 0.0;

  std::size_t chunks = 0;
  std::size_t prev_hyp = npos, prev_ref = npos;
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    if (alignment[i] == npos) continue;
    if (prev_hyp == npos || i != prev_hyp + 1 || alignment[i] != prev_ref + 1) ++chunks;
    prev_hyp = i;
    prev_ref = alignment[i];
  }

  const double m = static_cast<double>(matches);
  const double precision = m / static_cast<double>(hyp.size());
  const double recall = m / static_cast<double>(ref.size());
  const double alpha = params.meteor_alpha;
  const double fmean = precision * recall / (alpha * precision + (1.0 - alpha) * recall);
  const double penalty = params.meteor_gamma * std::pow(static_cast<double>(chunks) / m, params.meteor_beta);
  return std::clamp(fmean * (1.0 - penalty), 0.0, 1.0);
}

double score_pair(Metric metric, std::string_view hyp, std::string_view ref, const MetricParams& params) {
  switch (metric) {
    case Metric::Bleu: return bleu(tokenize(hyp), tokenize(ref), params);
    case Metric::Chrf: return chrf(hyp, ref, params);
    case Metric::Meteor: return meteor(tokenize(hyp), tokenize(ref), params);
  }
  throw UsageError("unknown metric");
}

ScoreTable score_dataset(const Dataset& ds, Metric metric, const MetricParams& params, unsigned jobs) {
  params.validate();
  std::vector<double> values(ds.samples.size());
  parallel_for(ds.samples.size(), jobs, [&](std::size_t i) {
    const Sample& s = ds.samples[i];
    values[i] = score_pair(metric, s.hyp, reference_text(s), params);
  });

  ScoreTable table;
  table.scorer_id = std::string(to_string(metric));
  table.orientation = Orientation::HigherIsFaithful;
  for (std::size_t i = 0; i < values.size(); ++i) table.scores.emplace(ds.samples[i].id, values[i]);
  return table;
}

}  // namespace hallens
