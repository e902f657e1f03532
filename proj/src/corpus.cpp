#include "alwb/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "alwb/errors.hpp"
#include "alwb/text.hpp"

namespace alwb {

std::vector<std::string> Sentence::gold_labels() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.gold);
  return out;
}

std::vector<std::string> Sentence::normalized_tokens() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.normalized);
  return out;
}

bool Sentence::has_pos() const {
  return std::all_of(tokens.begin(), tokens.end(), [](const Token& t) { return t.pos.has_value(); });
}

bool Corpus::has_pos() const {
  return !sentences.empty() &&
         std::all_of(sentences.begin(), sentences.end(), [](const Sentence& s) { return s.has_pos(); });
}

void Corpus::refresh() {
  std::set<std::string> labels;
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) labels.insert(t.gold);
  }
  label_alphabet.clear();
  if (labels.erase("O")) label_alphabet.emplace_back("O");
  label_alphabet.insert(label_alphabet.end(), labels.begin(), labels.end());
  totals = count_units(std::span<const Sentence>(sentences));
}

std::string preprocess(std::string_view surface) {
  if (text::is_ascii_punct(surface)) return {};
  std::string out;
  out.reserve(surface.size() + 4);
  std::size_t i = 0;
  while (i < surface.size()) {
    const auto c = static_cast<unsigned char>(surface[i]);
    if (std::isdigit(c)) {
      while (i < surface.size() && std::isdigit(static_cast<unsigned char>(surface[i]))) ++i;
      out += "<num>";
      continue;
    }
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
    ++i;
  }
  return out;
}

bool is_valid_bio_label(std::string_view label) {
  if (label == "O") return true;
  return label.size() > 2 && (label[0] == 'B' || label[0] == 'I') && label[1] == '-';
}

std::string_view label_type(std::string_view label) {
  return label.size() > 2 ? label.substr(2) : std::string_view{};
}

namespace {

void validate_transitions(const Sentence& s, std::size_t line_no) {
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    const auto& lab = s.tokens[i].gold;
    if (lab[0] != 'I') continue;
    const bool continues = i > 0 && s.tokens[i - 1].gold != "O" &&
                           label_type(s.tokens[i - 1].gold) == label_type(lab);
    if (!continues) {
      throw DataError("illegal BIO transition to '" + lab + "' in sentence ending before line " +
                      std::to_string(line_no));
    }
  }
}

}  // namespace

Corpus read_conll(std::istream& in) {
  Corpus corpus;
  Sentence current;
  std::string doc_id;
  std::string line;
  std::size_t line_no = 0;
  bool any_content = false;

  auto flush = [&] {
    if (current.tokens.empty()) return;
    validate_transitions(current, line_no);
    current.doc_id = doc_id;
    current.seq_id = static_cast<int>(corpus.sentences.size());
    corpus.sentences.push_back(std::move(current));
    current = Sentence{};
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("# doc ", 0) == 0) {
      flush();
      doc_id = std::string(text::trim(std::string_view(line).substr(6)));
      any_content = true;
      continue;
    }
    if (text::trim(line).empty()) {
      flush();
      continue;
    }
    any_content = true;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 2 && cols.size() != 3) {
      throw DataError("malformed line " + std::to_string(line_no) + ": expected 2 or 3 tab-separated columns, got " +
                      std::to_string(cols.size()));
    }
    Token tok;
    tok.surface = cols.front();
    tok.gold = cols.back();
    if (tok.surface.empty()) throw DataError("malformed line " + std::to_string(line_no) + ": empty token");
    if (!is_valid_bio_label(tok.gold)) {
      throw DataError("malformed line " + std::to_string(line_no) + ": bad BIO label '" + tok.gold + "'");
    }
    if (cols.size() == 3) tok.pos = cols[1];
    tok.normalized = preprocess(tok.surface);
    current.tokens.push_back(std::move(tok));
  }
  flush();
  if (!any_content || corpus.sentences.empty()) throw DataError("empty input");
  corpus.refresh();
  return corpus;
}

Corpus read_conll_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    return read_conll(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_conll(std::ostream& out, const Corpus& corpus) {
  std::string doc;
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    const auto& s = corpus.sentences[i];
    if (i > 0) out << '\n';
    if (s.doc_id != doc) {
      out << "# doc " << s.doc_id << '\n';
      doc = s.doc_id;
    }
    for (const auto& t : s.tokens) {
      out << t.surface << '\t';
      if (t.pos) out << *t.pos << '\t';
      out << t.gold << '\n';
    }
  }
}

std::vector<ConceptSpan> spans_from_labels(std::span<const std::string> labels) {
  std::vector<ConceptSpan> spans;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& lab = labels[i];
    if (lab == "O" || lab.size() < 3) continue;
    const auto type = label_type(lab);
    const bool extends = lab[0] == 'I' && !spans.empty() && spans.back().end == static_cast<int>(i) - 1 &&
                         spans.back().type == type;
    if (extends) {
      spans.back().end = static_cast<int>(i);
    } else {
      spans.push_back({std::string(type), static_cast<int>(i), static_cast<int>(i)});
    }
  }
  return spans;
}

std::vector<ConceptSpan> extract_concepts(const Sentence& sentence) {
  return spans_from_labels(sentence.gold_labels());
}

UnitCounts count_units(const Sentence& sentence) {
  std::size_t concepts = 0;
  for (const auto& t : sentence.tokens) concepts += t.gold.size() > 2 && t.gold[0] == 'B';
  return {1, sentence.tokens.size(), concepts};
}

UnitCounts count_units(std::span<const Sentence> sentences) {
  UnitCounts c;
  for (const auto& s : sentences) c += count_units(s);
  return c;
}

UnitCounts count_units(const Corpus& corpus, std::span<const int> seq_ids) {
  UnitCounts c;
  for (int id : seq_ids) c += count_units(corpus.sentences.at(static_cast<std::size_t>(id)));
  return c;
}

}  // namespace alwb
