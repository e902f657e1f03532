#include "alwb/featgen.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>

#include "alwb/errors.hpp"
#include "alwb/text.hpp"

namespace alwb {

void Lexicon::add(std::string_view term, std::string_view group) {
  std::vector<std::string> key;
  for (const auto& piece : text::split_ws(term)) {
    auto norm = preprocess(piece);
    key.push_back(norm.empty() ? text::to_lower(piece) : std::move(norm));
  }
  if (key.empty() || text::trim(group).empty()) return;
  max_len_ = std::max(max_len_, key.size());
  entries_.emplace(std::move(key), std::string(text::trim(group)));
}

std::optional<std::string> Lexicon::find(const std::vector<std::string>& normalized) const {
  const auto it = entries_.find(normalized);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

Lexicon read_lexicon(std::istream& in) {
  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 2 || text::trim(cols[0]).empty() || text::trim(cols[1]).empty()) {
      throw DataError("lexicon line " + std::to_string(line_no) + ": expected 'term<TAB>group'");
    }
    lex.add(cols[0], cols[1]);
  }
  return lex;
}

Lexicon read_lexicon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon " + path);
  return read_lexicon(in);
}

std::vector<SemanticTag> semantic_spans(const Sentence& sentence, const Lexicon& lexicon) {
  const auto keys = token_keys(sentence);
  const std::size_t n = keys.size();
  std::vector<SemanticTag> tags(n);
  std::size_t i = 0;
  while (i < n) {
    bool matched = false;
    for (std::size_t len = std::min(lexicon.max_len(), n - i); len >= 1; --len) {
      const std::vector<std::string> probe(keys.begin() + static_cast<std::ptrdiff_t>(i),
                                           keys.begin() + static_cast<std::ptrdiff_t>(i + len));
      if (auto group = lexicon.find(probe)) {
        for (std::size_t k = i; k < i + len; ++k) tags[k] = {group, static_cast<int>(len)};
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) ++i;
  }
  return tags;
}

std::string word_shape(std::string_view surface) {
  std::string out;
  out.reserve(surface.size());
  for (unsigned char c : surface) {
    if (std::isupper(c)) {
      out += 'X';
    } else if (std::islower(c)) {
      out += 'x';
    } else if (std::isdigit(c)) {
      out += '0';
    } else {
      out += static_cast<char>(c);
    }
  }
  return out;
}

namespace {

std::string offset_tag(int o) { return "@" + std::to_string(o) + "="; }

std::string concat(const std::vector<std::string>& cps, std::size_t from, std::size_t len) {
  std::string s;
  for (std::size_t k = from; k < from + len; ++k) s += cps[k];
  return s;
}

}  // namespace

FeatureVector emit_group_A(const Sentence& sentence, const FeatureGroupConfig& cfg) {
  const int n = static_cast<int>(sentence.size());
  FeatureVector out(static_cast<std::size_t>(n));
  std::vector<std::string> lower;
  lower.reserve(sentence.size());
  for (const auto& t : sentence.tokens) lower.push_back(text::to_lower(t.surface));

  for (int i = 0; i < n; ++i) {
    auto& f = out[static_cast<std::size_t>(i)];
    const auto& surface = sentence.tokens[static_cast<std::size_t>(i)].surface;
    for (int o = -cfg.window; o <= cfg.window; ++o) {
      const int j = i + o;
      if (j >= 0 && j < n) f.push_back("A:w" + offset_tag(o) + lower[static_cast<std::size_t>(j)]);
    }

    bool has_upper = false, has_lower = false, has_digit = false, has_alpha = false;
    for (unsigned char c : surface) {
      has_upper |= std::isupper(c) != 0;
      has_lower |= std::islower(c) != 0;
      has_digit |= std::isdigit(c) != 0;
      has_alpha |= std::isalpha(c) != 0;
    }
    if (std::isupper(static_cast<unsigned char>(surface.front()))) f.emplace_back("A:initcap");
    if (has_upper && !has_lower) f.emplace_back("A:allcaps");
    if (has_digit) f.emplace_back("A:hasdigit");
    if (has_digit && has_alpha) f.emplace_back("A:alnum");
    if (text::is_ascii_punct(surface)) f.emplace_back("A:punct");
    f.push_back("A:shape=" + word_shape(surface));

    const auto cps = text::code_points(lower[static_cast<std::size_t>(i)]);
    for (int len = 1; len <= cfg.max_affix && static_cast<std::size_t>(len) <= cps.size(); ++len) {
      const auto l = static_cast<std::size_t>(len);
      f.push_back("A:pre" + std::to_string(len) + "=" + concat(cps, 0, l));
      f.push_back("A:suf" + std::to_string(len) + "=" + concat(cps, cps.size() - l, l));
    }
    for (std::size_t len = 2; len <= 3; ++len) {
      for (std::size_t s = 0; s + len <= cps.size(); ++s) {
        f.push_back("A:c" + std::to_string(len) + "=" + concat(cps, s, len));
      }
    }
  }
  return out;
}

FeatureVector emit_group_B(const Sentence& sentence, const FeatureGroupConfig& cfg) {
  const int n = static_cast<int>(sentence.size());
  FeatureVector out(static_cast<std::size_t>(n));
  if (!sentence.has_pos()) return out;
  auto pos = [&](int j) -> const std::string& { return *sentence.tokens[static_cast<std::size_t>(j)].pos; };
  for (int i = 0; i < n; ++i) {
    auto& f = out[static_cast<std::size_t>(i)];
    for (int o = -cfg.window; o <= cfg.window; ++o) {
      const int j = i + o;
      if (j >= 0 && j < n) f.push_back("B:pos" + offset_tag(o) + pos(j));
    }
    if (i > 0) f.push_back("B:posbi=" + pos(i - 1) + "_" + pos(i));
  }
  return out;
}

FeatureVector emit_group_C(const Sentence& sentence, const Lexicon& lexicon, const FeatureGroupConfig& cfg) {
  const auto tags = semantic_spans(sentence, lexicon);
  const int n = static_cast<int>(sentence.size());
  FeatureVector out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int o = -cfg.window; o <= cfg.window; ++o) {
      const int j = i + o;
      if (j < 0 || j >= n) continue;
      const auto& g = tags[static_cast<std::size_t>(j)].group;
      out[static_cast<std::size_t>(i)].push_back("C:sem" + offset_tag(o) + (g ? *g : std::string("NONE")));
    }
  }
  return out;
}

FeatureVector assemble(const Sentence& sentence, const FeatureGroupConfig& cfg, const Lexicon* lexicon,
                       const UnsupResources* unsup, const UnsupFeatureConfig& unsup_cfg) {
  FeatureVector all(sentence.size());
  auto merge = [&](FeatureVector part) {
    for (std::size_t i = 0; i < all.size(); ++i) {
      all[i].insert(all[i].end(), std::make_move_iterator(part[i].begin()), std::make_move_iterator(part[i].end()));
    }
  };
  if (cfg.enabled('A')) merge(emit_group_A(sentence, cfg));
  if (cfg.enabled('B')) merge(emit_group_B(sentence, cfg));
  if (cfg.enabled('C')) {
    static const Lexicon kEmpty;
    merge(emit_group_C(sentence, lexicon ? *lexicon : kEmpty, cfg));
  }
  std::string unsup_letters;
  for (char c : cfg.letters) {
    if (UnsupFeatureConfig::is_unsup_letter(c)) unsup_letters += c;
  }
  if (!unsup_letters.empty()) {
    if (unsup == nullptr) throw ConfigError("unsupervised groups " + unsup_letters + " enabled without codebooks");
    merge(emit_unsup_features(sentence, *unsup, unsup_cfg, unsup_letters, cfg.window));
  }
  for (auto& f : all) {
    std::sort(f.begin(), f.end());
    f.erase(std::unique(f.begin(), f.end()), f.end());
  }
  return all;
}

}  // namespace alwb
