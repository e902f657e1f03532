#pragma once

// BIO-labelled sequence data: tokens, sentences, corpora, concept spans and
// annotation-unit counting.

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace alwb {

struct Token {
  std::string surface;
  std::string normalized;  ///< preprocess(surface)
  std::optional<std::string> pos;
  std::string gold;  ///< "O", "B-<type>" or "I-<type>"

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::string doc_id;
  int seq_id = 0;

  std::size_t size() const { return tokens.size(); }
  std::vector<std::string> gold_labels() const;
  std::vector<std::string> normalized_tokens() const;
  bool has_pos() const;

  bool operator==(const Sentence&) const = default;
};

struct UnitCounts {
  std::size_t sequences = 0;
  std::size_t tokens = 0;
  std::size_t concepts = 0;

  UnitCounts& operator+=(const UnitCounts& o) {
    sequences += o.sequences;
    tokens += o.tokens;
    concepts += o.concepts;
    return *this;
  }
  friend UnitCounts operator+(UnitCounts a, const UnitCounts& b) { return a += b; }
  bool operator==(const UnitCounts&) const = default;
};

struct ConceptSpan {
  std::string type;
  int start = 0;  ///< inclusive
  int end = 0;    ///< inclusive

  auto operator<=>(const ConceptSpan&) const = default;
};

struct Corpus {
  std::vector<Sentence> sentences;
  /// Sorted; "O" first.
  std::vector<std::string> label_alphabet;
  UnitCounts totals;

  std::size_t size() const { return sentences.size(); }
  bool has_pos() const;
  /// Recompute label_alphabet and totals from the sentences.
  void refresh();

  bool operator==(const Corpus&) const = default;
};

/// Lower-case, collapse digit runs to "<num>", map pure punctuation to "".
std::string preprocess(std::string_view surface);

/// "O", "B-x" or "I-x" with non-empty x.
bool is_valid_bio_label(std::string_view label);

/// Type of a B-/I- label; empty for "O".
std::string_view label_type(std::string_view label);

/// Parse tab-separated CoNLL: surface [POS] BIO, blank line between
/// sentences, "# doc <id>" starts a document. Throws DataError.
Corpus read_conll(std::istream& in);
Corpus read_conll_file(const std::string& path);

void write_conll(std::ostream& out, const Corpus& corpus);

/// Maximal B..I runs of a well-formed label sequence.
std::vector<ConceptSpan> extract_concepts(const Sentence& sentence);

/// Spans of a possibly ill-formed (predicted) label sequence. An I-x that
/// does not continue an x span opens a new one.
std::vector<ConceptSpan> spans_from_labels(std::span<const std::string> labels);

UnitCounts count_units(const Sentence& sentence);
UnitCounts count_units(std::span<const Sentence> sentences);
/// Counts over the sentences of `corpus` with the given seq_ids.
UnitCounts count_units(const Corpus& corpus, std::span<const int> seq_ids);

}  // namespace alwb
